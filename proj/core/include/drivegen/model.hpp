// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <torch/torch.h>

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "drivegen/codec.hpp"
#include "drivegen/schedule.hpp"
#include "drivegen/tokenizer.hpp"

namespace drivegen {

inline constexpr int kTextLen = 77;

struct ModelConfig {
  int image_h = 128;
  int image_w = 256;
  int views = 6;
  std::vector<int64_t> channels = {48, 64, 96, 112};  // stage widths, multiples of 8
  int64_t text_dim = 64;
  int64_t pool_dim = 32;
  int64_t heads = 4;
  std::vector<int> attn_stages = {3, 4};  // encoder stages with text cross-attention
  bool cross_view = true;
  bool condition_mandatory = false;
  std::string dtype = "float32";  // or "float64"
  ScheduleConfig schedule;

  torch::Dtype torch_dtype() const;
  int latent_h() const { return image_h / kCodecFactor; }
  int latent_w() const { return image_w / kCodecFactor; }
};

void validate_model_config(const ModelConfig& config);

// -- Building blocks ---------------------------------------------------------

class ResBlockImpl : public torch::nn::Module {
public:
  ResBlockImpl(int64_t in_ch, int64_t out_ch, int64_t temb_dim);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& temb);

private:
  torch::nn::GroupNorm norm1_{nullptr}, norm2_{nullptr};
  torch::nn::Conv2d conv1_{nullptr}, conv2_{nullptr};
  torch::nn::Linear time_proj_{nullptr};
  torch::nn::Conv2d skip_{nullptr};  // 1x1 when channels change
};
TORCH_MODULE(ResBlock);

// Adapter-side block: two 3x3 convs with a residual, no norm or time input.
class AdapterBlockImpl : public torch::nn::Module {
public:
  explicit AdapterBlockImpl(int64_t ch);
  torch::Tensor forward(const torch::Tensor& x);

private:
  torch::nn::Conv2d conv1_{nullptr}, conv2_{nullptr};
};
TORCH_MODULE(AdapterBlock);

// Cross-attention from spatial features to the 77-token text embedding.
// Output projection is zero-initialized, so the block starts as identity.
class TextCrossAttentionImpl : public torch::nn::Module {
public:
  TextCrossAttentionImpl(int64_t ch, int64_t text_dim, int64_t heads);
  torch::Tensor forward(const torch::Tensor& x, const torch::Tensor& text);

private:
  int64_t heads_;
  torch::nn::GroupNorm norm_{nullptr};
  torch::nn::Conv2d q_{nullptr};
  torch::nn::Linear k_{nullptr}, v_{nullptr};
  torch::nn::Conv2d zero_out_{nullptr};
};
TORCH_MODULE(TextCrossAttention);

// Bottleneck self-attention over all (view, position) tokens of one scene.
// Zero-initialized output projection: identity at init, and one-view scenes
// match the disabled path exactly at init.
class CrossViewBlockImpl : public torch::nn::Module {
public:
  CrossViewBlockImpl(int64_t ch, int64_t heads);
  torch::Tensor forward(const torch::Tensor& x, int views_per_scene);

private:
  int64_t heads_;
  torch::nn::LayerNorm norm_{nullptr};
  torch::nn::Linear qkv_{nullptr};
  torch::nn::Linear zero_out_{nullptr};
};
TORCH_MODULE(CrossViewBlock);

struct AdapterFeatures {
  std::array<torch::Tensor, 4> stages;  // F_c^1..F_c^4, encoder-matching shapes
  torch::Tensor pooled;                 // unit-normalized pooled feature
};

// T2I-style condition adapter: pixel-unshuffled condition image through four
// stages whose resolutions mirror the denoiser encoder. Every stage output
// passes through a zero-initialized 1x1 projection, so a fresh adapter
// contributes exactly nothing.
class AdapterImpl : public torch::nn::Module {
public:
  explicit AdapterImpl(const ModelConfig& config);
  AdapterFeatures forward(const torch::Tensor& cond);

private:
  torch::nn::Conv2d conv_in_{nullptr};
  std::vector<AdapterBlock> blocks_;          // one per stage
  std::vector<torch::nn::Conv2d> downs_;      // stride-2 convs between stages
  std::vector<torch::nn::Conv2d> zero_projs_; // zero-initialized per-stage projections
  torch::nn::Linear pool_head_{nullptr};
};
TORCH_MODULE(Adapter);

// Token embedding plus positional offsets; padding ids map to the fixed pad
// embedding row (no positional offset).
class TextEncoderImpl : public torch::nn::Module {
public:
  TextEncoderImpl(int64_t vocab_size, int64_t dim);
  // tokens: int64 [B, 77]
  torch::Tensor forward(const torch::Tensor& tokens);

private:
  torch::nn::Embedding embedding_{nullptr};
  torch::Tensor pos_;
};
TORCH_MODULE(TextEncoder);

// UNet denoiser: four encoder stages (stage 1 at latent resolution, stride-2
// convs between stages with ceil halving), mirrored decoder with skip
// connections, text cross-attention at configured stages and the bottleneck.
class DenoiserImpl : public torch::nn::Module {
public:
  explicit DenoiserImpl(const ModelConfig& config);

  using MidHook = std::function<torch::Tensor(const torch::Tensor&)>;
  torch::Tensor forward(const torch::Tensor& z_t, const torch::Tensor& t_frac,
                        const torch::Tensor& text,
                        const std::optional<AdapterFeatures>& map_feat,
                        const std::optional<AdapterFeatures>& box_feat,
                        const MidHook& mid_hook);

  // Encoder features per stage for the most recent forward (pre-injection);
  // used by shape tests.
  const std::array<std::vector<int64_t>, 4>& last_stage_shapes() const {
    return last_stage_shapes_;
  }

private:
  torch::Tensor time_embedding(const torch::Tensor& t_frac) const;

  int64_t time_dim_;
  torch::nn::Linear time_mlp1_{nullptr}, time_mlp2_{nullptr};
  torch::nn::Conv2d conv_in_{nullptr};
  std::vector<ResBlock> enc_blocks_;
  std::vector<torch::nn::Conv2d> downs_;
  std::vector<TextCrossAttention> enc_attn_;  // per stage, nullptr when disabled
  ResBlock mid_block1_{nullptr}, mid_block2_{nullptr};
  TextCrossAttention mid_attn_{nullptr};
  std::vector<torch::nn::Conv2d> up_convs_;
  std::vector<ResBlock> dec_blocks_;
  torch::nn::GroupNorm out_norm_{nullptr};
  torch::nn::Conv2d zero_conv_out_{nullptr};
  std::vector<int> attn_stages_;
  std::array<std::vector<int64_t>, 4> last_stage_shapes_;
};
TORCH_MODULE(Denoiser);

// -- Full model ---------------------------------------------------------------

class DiffusionModelImpl : public torch::nn::Module {
public:
  explicit DiffusionModelImpl(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  const NoiseSchedule& schedule() const { return schedule_; }
  const Tokenizer& tokenizer() const { return tokenizer_; }

  // Deterministic parameter initialization from a named substream; overrides
  // torch's default init so runs do not depend on torch's global RNG.
  void init_parameters(uint64_t seed);

  // Encodes pre-truncated token id sequences (length <= 77 each).
  torch::Tensor encode_text(const std::vector<std::vector<int32_t>>& token_batch);
  torch::Tensor encode_text_strings(const std::vector<std::string>& texts);
  torch::Tensor encode_empty_text(int64_t batch);

  AdapterFeatures run_map_adapter(const torch::Tensor& cond) { return map_adapter_->forward(cond); }
  AdapterFeatures run_box_adapter(const torch::Tensor& cond) { return box_adapter_->forward(cond); }

  // Core denoiser evaluation with optional, pre-computed adapter features.
  torch::Tensor predict_eps(const torch::Tensor& z_t, const std::vector<int>& t,
                            const torch::Tensor& text_emb,
                            const std::optional<AdapterFeatures>& map_feat,
                            const std::optional<AdapterFeatures>& box_feat,
                            int views_per_scene, bool enable_cross_view);

  // Convenience overload running the adapters on raw condition images.
  torch::Tensor predict_eps(const torch::Tensor& z_t, const std::vector<int>& t,
                            const torch::Tensor& text_emb,
                            const std::optional<torch::Tensor>& map_cond,
                            const std::optional<torch::Tensor>& box_cond,
                            int views_per_scene);

  Denoiser& denoiser() { return denoiser_; }
  Adapter& map_adapter() { return map_adapter_; }
  Adapter& box_adapter() { return box_adapter_; }
  TextEncoder& text_encoder() { return text_encoder_; }
  CrossViewBlock& cross_view() { return cross_view_; }

  int64_t parameter_count() const;

private:
  ModelConfig config_;
  NoiseSchedule schedule_;
  Tokenizer tokenizer_;
  Denoiser denoiser_{nullptr};
  Adapter map_adapter_{nullptr}, box_adapter_{nullptr};
  TextEncoder text_encoder_{nullptr};
  CrossViewBlock cross_view_{nullptr};
};
TORCH_MODULE(DiffusionModel);

}  // namespace drivegen
