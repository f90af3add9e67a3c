// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <torch/torch.h>

#include <optional>

namespace drivegen {

struct FrequencyFilterConfig {
  double tau = 0.5;  // normalized radial cutoff in (0, 1)
};

struct LossWeights {
  double lambda_freq = 0.5;
  double lambda_mi = 0.05;
  double mi_temperature = 1.0;
  // Sensitivity flag: negate the contrastive term (standard InfoNCE sign).
  bool mi_sign_flip = false;
};

void validate_loss_config(const LossWeights& weights, const FrequencyFilterConfig& freq);

// Masked mean over spatial cells: sum(err * mask) / (C * sum(mask)).
// Throws UsageError when the mask selects no cells ("degenerate mask").
torch::Tensor masked_mean(const torch::Tensor& err, const torch::Tensor& mask);

// Mean squared error; with a mask, the mean runs over masked cells only
// (so per-region losses are scale-comparable across scenes).
torch::Tensor diffusion_loss(const torch::Tensor& eps_hat, const torch::Tensor& eps,
                             const std::optional<torch::Tensor>& mask = std::nullopt);

// Binary radial high-pass over the last two dims: per-channel 2D DFT, zero
// all bins with normalized radial magnitude <= tau, inverse DFT, real part.
// Frequencies are cycles/pixel on [-0.5, 0.5) per axis; the radial norm is
// divided by its grid maximum so tau spans (0,1) on any aspect ratio.
torch::Tensor high_pass(const torch::Tensor& x, const FrequencyFilterConfig& cfg);

// Elementwise squared error of the high-passed difference.
torch::Tensor freq_err(const torch::Tensor& x_pred, const torch::Tensor& x_target,
                       const FrequencyFilterConfig& cfg);

// Mean (optionally masked) of freq_err.
torch::Tensor freq_loss(const torch::Tensor& x_pred, const torch::Tensor& x_target,
                        const FrequencyFilterConfig& cfg,
                        const std::optional<torch::Tensor>& mask = std::nullopt);

// Closed-form x0 estimate from the eps prediction at per-sample alpha_bar.
torch::Tensor x0_from_eps(const torch::Tensor& z_t, const torch::Tensor& eps_hat,
                          const torch::Tensor& alpha_bar);

// Contrastive mutual-information constraint, sign as printed: minimizing
// pushes the positive-pair similarity down relative to in-batch negatives.
// sim is cosine similarity with temperature. Inputs are re-normalized
// defensively. Value range for one sample: (-log N - 2/theta, 0]; exactly 0
// when N == 1.
torch::Tensor mi_loss_single(const torch::Tensor& f_m, const torch::Tensor& f_b_batch,
                             int64_t positive_index, const LossWeights& weights);
// Batched form with positives on the diagonal; mean over rows.
torch::Tensor mi_loss_batch(const torch::Tensor& f_m, const torch::Tensor& f_b,
                            const LossWeights& weights);

// -- Composed stage losses -----------------------------------------------------

struct StageLossInputs {
  torch::Tensor eps_hat;
  torch::Tensor eps;
  torch::Tensor z_t;
  torch::Tensor z0;
  torch::Tensor alpha_bar;  // [B,1,1,1]
  torch::Tensor m_map;      // [B,1,h,w] binary
  torch::Tensor m_box;
  torch::Tensor m_bg;
};

struct LossTerms {
  torch::Tensor total;
  double diff = 0.0;
  double freq = 0.0;
  double mi = 0.0;
};

// Stage-1 road phase: diffusion on (m_map + m_bg) plus lambda_freq * freq on
// m_map. A lambda-weighted term whose mask selects no cells contributes zero.
LossTerms road_loss(const StageLossInputs& in, const LossWeights& weights,
                    const FrequencyFilterConfig& cfg);

// Stage-1 object phase: both terms masked by m_box.
LossTerms object_loss(const StageLossInputs& in, const LossWeights& weights,
                      const FrequencyFilterConfig& cfg);

// Stage 2: unmasked diffusion + lambda_freq * freq on (m_map + m_box) +
// lambda_mi * mi over pooled adapter features.
LossTerms stage2_loss(const StageLossInputs& in, const std::optional<torch::Tensor>& f_map,
                      const std::optional<torch::Tensor>& f_box, const LossWeights& weights,
                      const FrequencyFilterConfig& cfg);

}  // namespace drivegen
