// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#include "drivegen/codec.hpp"

#include "drivegen/errors.hpp"

namespace drivegen {

torch::Tensor encode_latent(const torch::Tensor& pixels) {
  if (pixels.dim() != 4 || pixels.size(1) != 3)
    throw UsageError("encode_latent expects [B,3,H,W]");
  if (pixels.size(2) % kCodecFactor != 0 || pixels.size(3) % kCodecFactor != 0)
    throw UsageError("pixel resolution not divisible by the codec factor");
  return torch::pixel_unshuffle(pixels, kCodecFactor);
}

torch::Tensor decode_latent(const torch::Tensor& latents) {
  if (latents.dim() != 4 || latents.size(1) != kLatentChannels)
    throw UsageError("decode_latent expects [B,192,h,w]");
  return torch::pixel_shuffle(latents, kCodecFactor);
}

torch::Tensor image_to_tensor(const Image& img, torch::Dtype dtype) {
  return u8_to_unit(image_to_u8_tensor(img), dtype);
}

torch::Tensor image_to_u8_tensor(const Image& img) {
  auto t = torch::empty({3, img.height(), img.width()}, torch::kUInt8);
  auto acc = t.accessor<uint8_t, 3>();
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const Rgb& px = img.at(y, x);
      acc[0][y][x] = px.r;
      acc[1][y][x] = px.g;
      acc[2][y][x] = px.b;
    }
  }
  return t;
}

torch::Tensor u8_to_unit(const torch::Tensor& u8, torch::Dtype dtype) {
  return u8.to(dtype).div(127.5).sub(1.0);
}

Image tensor_to_image(const torch::Tensor& chw) {
  if (chw.dim() != 3 || chw.size(0) != 3) throw UsageError("tensor_to_image expects [3,H,W]");
  auto t = chw.detach().add(1.0).mul(127.5).clamp(0, 255).round().to(torch::kUInt8).contiguous();
  auto acc = t.accessor<uint8_t, 3>();
  Image img(static_cast<int>(t.size(1)), static_cast<int>(t.size(2)));
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      img.at(y, x) = {acc[0][y][x], acc[1][y][x], acc[2][y][x]};
    }
  }
  return img;
}

}  // namespace drivegen
