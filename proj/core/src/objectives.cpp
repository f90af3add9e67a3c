// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#include "drivegen/objectives.hpp"

#include <cmath>

#include "drivegen/errors.hpp"

namespace drivegen {

namespace F = torch::nn::functional;

void validate_loss_config(const LossWeights& weights, const FrequencyFilterConfig& freq) {
  if (weights.lambda_freq < 0 || weights.lambda_mi < 0 || weights.mi_temperature <= 0)
    throw ConfigError("loss weights must be non-negative with positive temperature");
  if (!(freq.tau > 0.0) || !(freq.tau < 1.0)) throw ConfigError("tau must be in (0, 1)");
}

torch::Tensor masked_mean(const torch::Tensor& err, const torch::Tensor& mask) {
  auto m = mask.to(err.dtype());
  auto cells = m.sum();
  if (cells.item<double>() <= 0) throw UsageError("degenerate mask: no cells selected");
  const double channels = static_cast<double>(err.size(1));
  return (err * m).sum() / (cells * channels);
}

namespace {

// Zero-contribution variant for lambda-weighted terms on empty regions.
torch::Tensor masked_mean_or_zero(const torch::Tensor& err, const torch::Tensor& mask) {
  auto m = mask.to(err.dtype());
  auto cells = m.sum();
  if (cells.item<double>() <= 0) return torch::zeros({}, err.options());
  return (err * m).sum() / (cells * static_cast<double>(err.size(1)));
}

}  // namespace

torch::Tensor diffusion_loss(const torch::Tensor& eps_hat, const torch::Tensor& eps,
                             const std::optional<torch::Tensor>& mask) {
  if (eps_hat.sizes() != eps.sizes()) throw UsageError("diffusion_loss shape mismatch");
  auto err = (eps_hat - eps).square();
  if (!mask) return err.mean();
  return masked_mean(err, *mask);
}

torch::Tensor high_pass(const torch::Tensor& x, const FrequencyFilterConfig& cfg) {
  if (!(cfg.tau > 0.0) || !(cfg.tau < 1.0)) throw ConfigError("tau must be in (0, 1)");
  const int64_t h = x.size(-2), w = x.size(-1);
  auto real_dtype = x.scalar_type() == torch::kFloat64 ? torch::kFloat64 : torch::kFloat32;
  auto opts = torch::TensorOptions().dtype(real_dtype);
  auto fy = torch::fft::fftfreq(h, 1.0, opts);  // cycles/pixel in [-0.5, 0.5)
  auto fx = torch::fft::fftfreq(w, 1.0, opts);
  auto radial = (fy.square().unsqueeze(1) + fx.square().unsqueeze(0)).sqrt();
  auto keep = (radial / radial.max()).gt(cfg.tau).to(x.dtype());
  auto spectrum = torch::fft::fft2(x);
  return torch::real(torch::fft::ifft2(spectrum * keep));
}

torch::Tensor freq_err(const torch::Tensor& x_pred, const torch::Tensor& x_target,
                       const FrequencyFilterConfig& cfg) {
  if (x_pred.sizes() != x_target.sizes()) throw UsageError("freq_err shape mismatch");
  return high_pass(x_pred - x_target, cfg).square();
}

torch::Tensor freq_loss(const torch::Tensor& x_pred, const torch::Tensor& x_target,
                        const FrequencyFilterConfig& cfg,
                        const std::optional<torch::Tensor>& mask) {
  auto err = freq_err(x_pred, x_target, cfg);
  if (!mask) return err.mean();
  return masked_mean(err, *mask);
}

torch::Tensor x0_from_eps(const torch::Tensor& z_t, const torch::Tensor& eps_hat,
                          const torch::Tensor& alpha_bar) {
  return (z_t - (1.0 - alpha_bar).sqrt() * eps_hat) / alpha_bar.sqrt();
}

namespace {

torch::Tensor cosine_rows(const torch::Tensor& t) {
  return F::normalize(t, F::NormalizeFuncOptions().dim(-1).eps(1e-12));
}

}  // namespace

torch::Tensor mi_loss_single(const torch::Tensor& f_m, const torch::Tensor& f_b_batch,
                             int64_t positive_index, const LossWeights& weights) {
  if (f_b_batch.dim() != 2 || f_b_batch.size(0) < 1)
    throw UsageError("mi_loss needs at least one box feature");
  if (positive_index < 0 || positive_index >= f_b_batch.size(0))
    throw UsageError("mi_loss positive index out of range");
  auto fm = cosine_rows(f_m.view({1, -1})).squeeze(0);
  auto fb = cosine_rows(f_b_batch);
  auto sims = fb.matmul(fm) / weights.mi_temperature;
  auto value = sims.index({positive_index}) - torch::logsumexp(sims, 0);
  return weights.mi_sign_flip ? -value : value;
}

torch::Tensor mi_loss_batch(const torch::Tensor& f_m, const torch::Tensor& f_b,
                            const LossWeights& weights) {
  if (f_m.dim() != 2 || f_b.dim() != 2 || f_m.size(0) != f_b.size(0) || f_m.size(0) < 1)
    throw UsageError("mi_loss_batch expects matching [N,d] features, N >= 1");
  auto fm = cosine_rows(f_m);
  auto fb = cosine_rows(f_b);
  auto sims = fm.matmul(fb.t()) / weights.mi_temperature;  // [N,N], row i vs all box features
  auto value = (sims.diagonal() - torch::logsumexp(sims, 1)).mean();
  return weights.mi_sign_flip ? -value : value;
}

LossTerms road_loss(const StageLossInputs& in, const LossWeights& weights,
                    const FrequencyFilterConfig& cfg) {
  LossTerms out;
  auto region = in.m_map + in.m_bg;
  auto diff = masked_mean((in.eps_hat - in.eps).square(), region);
  out.diff = diff.item<double>();
  out.total = diff;
  if (weights.lambda_freq > 0) {
    auto x0 = x0_from_eps(in.z_t, in.eps_hat, in.alpha_bar);
    auto freq = masked_mean_or_zero(freq_err(x0, in.z0, cfg), in.m_map);
    out.freq = freq.item<double>();
    out.total = out.total + weights.lambda_freq * freq;
  }
  return out;
}

LossTerms object_loss(const StageLossInputs& in, const LossWeights& weights,
                      const FrequencyFilterConfig& cfg) {
  LossTerms out;
  auto diff = masked_mean_or_zero((in.eps_hat - in.eps).square(), in.m_box);
  out.diff = diff.item<double>();
  out.total = diff;
  if (weights.lambda_freq > 0) {
    auto x0 = x0_from_eps(in.z_t, in.eps_hat, in.alpha_bar);
    auto freq = masked_mean_or_zero(freq_err(x0, in.z0, cfg), in.m_box);
    out.freq = freq.item<double>();
    out.total = out.total + weights.lambda_freq * freq;
  }
  return out;
}

LossTerms stage2_loss(const StageLossInputs& in, const std::optional<torch::Tensor>& f_map,
                      const std::optional<torch::Tensor>& f_box, const LossWeights& weights,
                      const FrequencyFilterConfig& cfg) {
  LossTerms out;
  auto diff = (in.eps_hat - in.eps).square().mean();
  out.diff = diff.item<double>();
  out.total = diff;
  if (weights.lambda_freq > 0) {
    auto x0 = x0_from_eps(in.z_t, in.eps_hat, in.alpha_bar);
    auto freq = masked_mean_or_zero(freq_err(x0, in.z0, cfg), in.m_map + in.m_box);
    out.freq = freq.item<double>();
    out.total = out.total + weights.lambda_freq * freq;
  }
  if (weights.lambda_mi > 0 && f_map && f_box && f_map->size(0) >= 1) {
    auto mi = mi_loss_batch(*f_map, *f_box, weights);
    out.mi = mi.item<double>();
    out.total = out.total + weights.lambda_mi * mi;
  }
  return out;
}

}  // namespace drivegen
