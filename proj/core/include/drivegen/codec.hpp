// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <torch/torch.h>

#include "drivegen/image.hpp"

namespace drivegen {

// Fixed latent codec: 8x space-to-depth on unit-scaled pixels. Lossless and
// untrained, so "latent space" has an exact decoder.
inline constexpr int kCodecFactor = 8;
inline constexpr int kLatentChannels = 3 * kCodecFactor * kCodecFactor;  // 192

// [B,3,H,W] in [-1,1] -> [B,192,H/8,W/8]
torch::Tensor encode_latent(const torch::Tensor& pixels);
// inverse of encode_latent
torch::Tensor decode_latent(const torch::Tensor& latents);

// uint8 image <-> float tensor in [-1, 1], shape [3,H,W]
torch::Tensor image_to_tensor(const Image& img, torch::Dtype dtype = torch::kFloat32);
Image tensor_to_image(const torch::Tensor& chw);

// uint8 tensor [3,H,W] (no scaling) for compact dataset caching.
torch::Tensor image_to_u8_tensor(const Image& img);
torch::Tensor u8_to_unit(const torch::Tensor& u8, torch::Dtype dtype = torch::kFloat32);

}  // namespace drivegen
