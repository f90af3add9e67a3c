// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#include "drivegen/model.hpp"

#include <algorithm>
#include <cmath>

#include "drivegen/errors.hpp"
#include "drivegen/rng.hpp"

namespace drivegen {

namespace F = torch::nn::functional;

torch::Dtype ModelConfig::torch_dtype() const {
  if (dtype == "float32") return torch::kFloat32;
  if (dtype == "float64") return torch::kFloat64;
  throw ConfigError("model dtype must be float32 or float64, got '" + dtype + "'");
}

void validate_model_config(const ModelConfig& config) {
  if (config.image_h % 16 != 0 || config.image_w % 16 != 0 || config.image_h < 16 ||
      config.image_w < 16)
    throw ConfigError("model image size must be a positive multiple of 16");
  if (config.channels.size() != 4) throw ConfigError("model needs exactly 4 stage widths");
  for (int64_t c : config.channels) {
    if (c < 8 || c % 8 != 0) throw ConfigError("stage widths must be positive multiples of 8");
    if (c % config.heads != 0) throw ConfigError("stage widths must be divisible by heads");
  }
  if (config.text_dim <= 0 || config.pool_dim <= 0 || config.heads <= 0)
    throw ConfigError("text_dim, pool_dim, heads must be positive");
  for (int s : config.attn_stages) {
    if (s < 1 || s > 4) throw ConfigError("attn_stages entries must be in 1..4");
  }
  config.torch_dtype();  // validates the dtype string
}

namespace {

torch::nn::Conv2d conv3x3(int64_t in, int64_t out, int stride = 1) {
  return torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, 3).stride(stride).padding(1));
}

torch::nn::Conv2d conv1x1(int64_t in, int64_t out) {
  return torch::nn::Conv2d(torch::nn::Conv2dOptions(in, out, 1));
}

}  // namespace

// -- ResBlock -----------------------------------------------------------------

ResBlockImpl::ResBlockImpl(int64_t in_ch, int64_t out_ch, int64_t temb_dim) {
  norm1_ = register_module("norm1", torch::nn::GroupNorm(torch::nn::GroupNormOptions(8, in_ch)));
  conv1_ = register_module("conv1", conv3x3(in_ch, out_ch));
  time_proj_ = register_module("time_proj", torch::nn::Linear(temb_dim, out_ch));
  norm2_ = register_module("norm2", torch::nn::GroupNorm(torch::nn::GroupNormOptions(8, out_ch)));
  conv2_ = register_module("conv2", conv3x3(out_ch, out_ch));
  if (in_ch != out_ch) skip_ = register_module("skip", conv1x1(in_ch, out_ch));
}

torch::Tensor ResBlockImpl::forward(const torch::Tensor& x, const torch::Tensor& temb) {
  auto h = conv1_(torch::silu(norm1_(x)));
  h = h + time_proj_(torch::silu(temb)).unsqueeze(-1).unsqueeze(-1);
  h = conv2_(torch::silu(norm2_(h)));
  return h + (skip_ ? skip_(x) : x);
}

// -- AdapterBlock ---------------------------------------------------------------

AdapterBlockImpl::AdapterBlockImpl(int64_t ch) {
  conv1_ = register_module("conv1", conv3x3(ch, ch));
  conv2_ = register_module("conv2", conv3x3(ch, ch));
}

torch::Tensor AdapterBlockImpl::forward(const torch::Tensor& x) {
  return x + conv2_(torch::silu(conv1_(x)));
}

// -- TextCrossAttention ---------------------------------------------------------

TextCrossAttentionImpl::TextCrossAttentionImpl(int64_t ch, int64_t text_dim, int64_t heads)
    : heads_(heads) {
  norm_ = register_module("norm", torch::nn::GroupNorm(torch::nn::GroupNormOptions(8, ch)));
  q_ = register_module("q", conv1x1(ch, ch));
  k_ = register_module("k", torch::nn::Linear(text_dim, ch));
  v_ = register_module("v", torch::nn::Linear(text_dim, ch));
  zero_out_ = register_module("zero_out", conv1x1(ch, ch));
}

torch::Tensor TextCrossAttentionImpl::forward(const torch::Tensor& x, const torch::Tensor& text) {
  const int64_t b = x.size(0), c = x.size(1), h = x.size(2), w = x.size(3);
  const int64_t dh = c / heads_;
  auto q = q_(norm_(x)).view({b, heads_, dh, h * w}).permute({0, 1, 3, 2});  // [B,H,hw,dh]
  auto k = k_(text).view({b, kTextLen, heads_, dh}).permute({0, 2, 1, 3});   // [B,H,77,dh]
  auto v = v_(text).view({b, kTextLen, heads_, dh}).permute({0, 2, 1, 3});
  auto attn = torch::softmax(q.matmul(k.transpose(-1, -2)) / std::sqrt(static_cast<double>(dh)),
                             -1);
  auto out = attn.matmul(v).permute({0, 1, 3, 2}).reshape({b, c, h, w});
  return x + zero_out_(out);
}

// -- CrossViewBlock ---------------------------------------------------------------

CrossViewBlockImpl::CrossViewBlockImpl(int64_t ch, int64_t heads) : heads_(heads) {
  norm_ = register_module("norm", torch::nn::LayerNorm(torch::nn::LayerNormOptions({ch})));
  qkv_ = register_module("qkv", torch::nn::Linear(ch, 3 * ch));
  zero_out_ = register_module("zero_out", torch::nn::Linear(ch, ch));
}

torch::Tensor CrossViewBlockImpl::forward(const torch::Tensor& x, int views_per_scene) {
  const int64_t b = x.size(0), c = x.size(1), h = x.size(2), w = x.size(3);
  if (views_per_scene <= 0 || b % views_per_scene != 0)
    throw UsageError("batch size not divisible by views per scene");
  const int64_t scenes = b / views_per_scene;
  const int64_t tokens = views_per_scene * h * w;
  const int64_t dh = c / heads_;
  // [B,C,h,w] -> [S, V*h*w, C]
  auto seq = x.view({scenes, views_per_scene, c, h * w})
                 .permute({0, 1, 3, 2})
                 .reshape({scenes, tokens, c});
  auto qkv = qkv_(norm_(seq)).view({scenes, tokens, 3, heads_, dh}).permute({2, 0, 3, 1, 4});
  auto q = qkv[0], k = qkv[1], v = qkv[2];  // [S,H,T,dh]
  auto attn = torch::softmax(q.matmul(k.transpose(-1, -2)) / std::sqrt(static_cast<double>(dh)),
                             -1);
  auto out = attn.matmul(v).permute({0, 2, 1, 3}).reshape({scenes, tokens, c});
  seq = seq + zero_out_(out);
  return seq.view({scenes, views_per_scene, h * w, c})
      .permute({0, 1, 3, 2})
      .reshape({b, c, h, w});
}

// -- Adapter ---------------------------------------------------------------------

AdapterImpl::AdapterImpl(const ModelConfig& config) {
  const auto& ch = config.channels;
  conv_in_ = register_module("conv_in", conv3x3(kLatentChannels, ch[0]));
  for (int i = 0; i < 4; ++i) {
    blocks_.push_back(register_module("block" + std::to_string(i + 1), AdapterBlock(ch[i])));
    zero_projs_.push_back(
        register_module("zero_proj" + std::to_string(i + 1), conv1x1(ch[i], ch[i])));
    if (i < 3) {
      downs_.push_back(
          register_module("down" + std::to_string(i + 1), conv3x3(ch[i], ch[i + 1], 2)));
    }
  }
  pool_head_ = register_module("pool_head",
                               torch::nn::Linear(torch::nn::LinearOptions(ch[3], config.pool_dim)));
}

AdapterFeatures AdapterImpl::forward(const torch::Tensor& cond) {
  if (cond.dim() != 4 || cond.size(1) != 3)
    throw ConfigError("adapter expects [B,3,H,W] condition images");
  if (cond.size(2) % kCodecFactor != 0 || cond.size(3) % kCodecFactor != 0)
    throw ConfigError("condition resolution not divisible by the latent factor");
  AdapterFeatures out;
  auto x = conv_in_(torch::pixel_unshuffle(cond, kCodecFactor));
  for (int i = 0; i < 4; ++i) {
    if (i > 0) x = downs_[i - 1](x);
    x = blocks_[i]->forward(x);
    out.stages[i] = zero_projs_[i](x);
  }
  auto pooled = out.stages[3].mean({2, 3});  // global average of F_c^4
  out.pooled = F::normalize(pool_head_(pooled), F::NormalizeFuncOptions().dim(-1).eps(1e-12));
  return out;
}

// -- TextEncoder -------------------------------------------------------------------

TextEncoderImpl::TextEncoderImpl(int64_t vocab_size, int64_t dim) {
  embedding_ = register_module("embedding", torch::nn::Embedding(vocab_size, dim));
  pos_ = register_parameter("pos_embedding", torch::zeros({kTextLen, dim}));
}

torch::Tensor TextEncoderImpl::forward(const torch::Tensor& tokens) {
  if (tokens.dim() != 2 || tokens.size(1) != kTextLen)
    throw UsageError("text encoder expects [B,77] token ids");
  auto emb = embedding_(tokens) + pos_.unsqueeze(0);
  // Pad positions collapse to the fixed pad embedding (no positional offset).
  auto pad_row = embedding_->weight.index({Tokenizer::kPadId});
  auto is_pad = tokens.eq(Tokenizer::kPadId).unsqueeze(-1);
  return torch::where(is_pad, pad_row.view({1, 1, -1}), emb);
}

// -- Denoiser ------------------------------------------------------------------------

DenoiserImpl::DenoiserImpl(const ModelConfig& config) : attn_stages_(config.attn_stages) {
  const auto& ch = config.channels;
  time_dim_ = ch[0];
  const int64_t temb_dim = 4 * ch[0];
  time_mlp1_ = register_module("time_mlp1", torch::nn::Linear(time_dim_, temb_dim));
  time_mlp2_ = register_module("time_mlp2", torch::nn::Linear(temb_dim, temb_dim));
  conv_in_ = register_module("conv_in", conv3x3(kLatentChannels, ch[0]));

  for (int i = 0; i < 4; ++i) {
    enc_blocks_.push_back(
        register_module("enc" + std::to_string(i + 1), ResBlock(ch[i], ch[i], temb_dim)));
    bool attn_here = std::find(attn_stages_.begin(), attn_stages_.end(), i + 1) !=
                     attn_stages_.end();
    if (attn_here) {
      enc_attn_.push_back(register_module("enc_attn" + std::to_string(i + 1),
                                          TextCrossAttention(ch[i], config.text_dim,
                                                             config.heads)));
    } else {
      enc_attn_.push_back(nullptr);
    }
    if (i < 3)
      downs_.push_back(
          register_module("down" + std::to_string(i + 1), conv3x3(ch[i], ch[i + 1], 2)));
  }

  mid_block1_ = register_module("mid1", ResBlock(ch[3], ch[3], temb_dim));
  mid_attn_ = register_module("mid_attn",
                              TextCrossAttention(ch[3], config.text_dim, config.heads));
  mid_block2_ = register_module("mid2", ResBlock(ch[3], ch[3], temb_dim));

  for (int i = 0; i < 3; ++i) {
    // up_convs_[i] lifts stage i+2 features to stage i+1 width.
    up_convs_.push_back(
        register_module("up" + std::to_string(i + 1), conv3x3(ch[i + 1], ch[i], 1)));
  }
  for (int i = 0; i < 4; ++i) {
    dec_blocks_.push_back(
        register_module("dec" + std::to_string(i + 1), ResBlock(2 * ch[i], ch[i], temb_dim)));
  }
  out_norm_ = register_module("out_norm", torch::nn::GroupNorm(torch::nn::GroupNormOptions(8, ch[0])));
  zero_conv_out_ = register_module("zero_conv_out", conv3x3(ch[0], kLatentChannels));
}

torch::Tensor DenoiserImpl::time_embedding(const torch::Tensor& t) const {
  const int64_t half = time_dim_ / 2;
  auto freqs = torch::exp(torch::arange(half, t.options()) *
                          (-std::log(10000.0) / static_cast<double>(half)));
  auto args = t.unsqueeze(1) * freqs.unsqueeze(0);
  return torch::cat({torch::sin(args), torch::cos(args)}, 1);
}

torch::Tensor DenoiserImpl::forward(const torch::Tensor& z_t, const torch::Tensor& t,
                                    const torch::Tensor& text,
                                    const std::optional<AdapterFeatures>& map_feat,
                                    const std::optional<AdapterFeatures>& box_feat,
                                    const MidHook& mid_hook) {
  auto temb = time_mlp2_(torch::silu(time_mlp1_(time_embedding(t))));
  auto x = conv_in_(z_t);

  std::array<torch::Tensor, 4> skips;
  for (int i = 0; i < 4; ++i) {
    if (i > 0) x = downs_[i - 1](x);
    x = enc_blocks_[i]->forward(x, temb);
    last_stage_shapes_[i] = x.sizes().vec();
    // Additive multi-scale condition injection.
    auto inject = [&](const std::optional<AdapterFeatures>& feat) {
      if (!feat) return;
      if (feat->stages[i].sizes() != x.sizes())
        throw ConfigError("adapter feature shape mismatch at stage " + std::to_string(i + 1));
      x = x + feat->stages[i];
    };
    inject(map_feat);
    inject(box_feat);
    if (enc_attn_[i]) x = enc_attn_[i]->forward(x, text);
    skips[i] = x;
  }

  x = mid_block1_->forward(x, temb);
  x = mid_attn_->forward(x, text);
  if (mid_hook) x = mid_hook(x);
  x = mid_block2_->forward(x, temb);

  for (int i = 3; i >= 0; --i) {
    x = dec_blocks_[i]->forward(torch::cat({x, skips[i]}, 1), temb);
    if (i > 0) {
      auto target = skips[i - 1].sizes();
      x = F::interpolate(x, F::InterpolateFuncOptions()
                                .size(std::vector<int64_t>{target[2], target[3]})
                                .mode(torch::kNearest));
      x = up_convs_[i - 1](x);
    }
  }
  return zero_conv_out_(torch::silu(out_norm_(x)));
}

// -- DiffusionModel --------------------------------------------------------------------

DiffusionModelImpl::DiffusionModelImpl(const ModelConfig& config)
    : config_(config), schedule_(config.schedule) {
  validate_model_config(config);
  denoiser_ = register_module("denoiser", Denoiser(config));
  map_adapter_ = register_module("map_adapter", Adapter(config));
  box_adapter_ = register_module("box_adapter", Adapter(config));
  text_encoder_ = register_module("text_encoder",
                                  TextEncoder(tokenizer_.vocab_size(), config.text_dim));
  if (config.cross_view) {
    cross_view_ = register_module("cross_view",
                                  CrossViewBlock(config.channels[3], config.heads));
  }
  this->to(config.torch_dtype());
}

void DiffusionModelImpl::init_parameters(uint64_t seed) {
  torch::NoGradGuard guard;
  Rng rng = substream(seed, "init");
  for (auto& item : named_parameters()) {
    const std::string& name = item.key();
    torch::Tensor p = item.value();
    const bool zero_init = name.find("zero_") != std::string::npos;
    const bool is_bias = name.ends_with(".bias");
    const bool is_embedding = name.find("embedding") != std::string::npos;
    if (zero_init) {
      p.zero_();
      continue;
    }
    if (p.dim() == 1 && !is_bias) {
      p.fill_(1.0);  // norm scale
      continue;
    }
    if (is_bias) {
      if (name.find("pool_head") != std::string::npos) {
        // Non-zero so the pooled feature is well-defined behind zero-init
        // stage projections.
        std::vector<double> buf(static_cast<size_t>(p.numel()));
        rng.fill_normal(buf.data(), buf.size());
        p.copy_(torch::tensor(buf, torch::kFloat64).view(p.sizes()).to(p.dtype()));
      } else {
        p.zero_();
      }
      continue;
    }
    double scale = 0.02;
    if (!is_embedding) {
      int64_t fan_in = p.size(1);
      for (int64_t d = 2; d < p.dim(); ++d) fan_in *= p.size(d);
      scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    }
    std::vector<double> buf(static_cast<size_t>(p.numel()));
    rng.fill_normal(buf.data(), buf.size());
    auto init = torch::tensor(buf, torch::kFloat64).view(p.sizes()).mul(scale);
    p.copy_(init.to(p.dtype()));
  }
}

torch::Tensor DiffusionModelImpl::encode_text(const std::vector<std::vector<int32_t>>& batch) {
  auto tokens = torch::full({static_cast<long>(batch.size()), kTextLen},
                            static_cast<long>(Tokenizer::kPadId), torch::kLong);
  for (size_t i = 0; i < batch.size(); ++i) {
    if (batch[i].size() > kTextLen)
      throw UsageError("token sequence exceeds the 77-token budget; truncate first");
    for (size_t j = 0; j < batch[i].size(); ++j)
      tokens.index_put_({static_cast<long>(i), static_cast<long>(j)},
                        static_cast<long>(batch[i][j]));
  }
  return text_encoder_->forward(tokens);
}

torch::Tensor DiffusionModelImpl::encode_text_strings(const std::vector<std::string>& texts) {
  std::vector<std::vector<int32_t>> batch;
  batch.reserve(texts.size());
  for (const auto& s : texts) batch.push_back(tokenizer_.encode(s));
  return encode_text(batch);
}

torch::Tensor DiffusionModelImpl::encode_empty_text(int64_t batch) {
  return encode_text(std::vector<std::vector<int32_t>>(static_cast<size_t>(batch)));
}

torch::Tensor DiffusionModelImpl::predict_eps(const torch::Tensor& z_t, const std::vector<int>& t,
                                              const torch::Tensor& text_emb,
                                              const std::optional<AdapterFeatures>& map_feat,
                                              const std::optional<AdapterFeatures>& box_feat,
                                              int views_per_scene, bool enable_cross_view) {
  if (z_t.dim() != 4 || z_t.size(1) != kLatentChannels)
    throw ConfigError("predict_eps expects [B,192,h,w] latents");
  if (static_cast<long>(t.size()) != z_t.size(0))
    throw UsageError("one timestep per batch element required");
  if (config_.condition_mandatory && !map_feat && !box_feat)
    throw UsageError("model is condition-mandatory but both conditions are absent");
  if (views_per_scene <= 0 || z_t.size(0) % views_per_scene != 0)
    throw UsageError("batch not divisible into whole scenes");

  std::vector<double> tvals(t.begin(), t.end());
  auto t_tensor = torch::tensor(tvals, torch::kFloat64).to(z_t.dtype());

  DenoiserImpl::MidHook hook;
  if (config_.cross_view && enable_cross_view) {
    hook = [this, views_per_scene](const torch::Tensor& x) {
      return cross_view_->forward(x, views_per_scene);
    };
  }
  return denoiser_->forward(z_t, t_tensor, text_emb, map_feat, box_feat, hook);
}

torch::Tensor DiffusionModelImpl::predict_eps(const torch::Tensor& z_t, const std::vector<int>& t,
                                              const torch::Tensor& text_emb,
                                              const std::optional<torch::Tensor>& map_cond,
                                              const std::optional<torch::Tensor>& box_cond,
                                              int views_per_scene) {
  std::optional<AdapterFeatures> mf, bf;
  if (map_cond) mf = map_adapter_->forward(*map_cond);
  if (box_cond) bf = box_adapter_->forward(*box_cond);
  return predict_eps(z_t, t, text_emb, mf, bf, views_per_scene, true);
}

int64_t DiffusionModelImpl::parameter_count() const {
  int64_t n = 0;
  for (const auto& p : parameters()) n += p.numel();
  return n;
}

}  // namespace drivegen
