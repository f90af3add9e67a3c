// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <torch/torch.h>

#include <vector>

namespace drivegen {

struct ScheduleConfig {
  int timesteps = 1000;
  double beta_start = 8.5e-4;
  double beta_end = 1.2e-2;
};

// Linear-beta variance schedule. alpha_bar is indexed with the convention
// alpha_bar(0) = 1 (clean data); training timesteps are 1..T.
class NoiseSchedule {
public:
  explicit NoiseSchedule(const ScheduleConfig& config = {});

  int timesteps() const { return static_cast<int>(betas_.size()); }
  double beta(int t) const;       // t in [1, T]
  double alpha_bar(int t) const;  // t in [0, T]
  const std::vector<double>& alpha_bar_all() const { return alpha_bars_; }

  // z_t = sqrt(alpha_bar_t) z0 + sqrt(1 - alpha_bar_t) eps, one t per batch
  // element. Throws UsageError for t outside [0, T].
  torch::Tensor add_noise(const torch::Tensor& z0, const std::vector<int>& t,
                          const torch::Tensor& eps) const;
  torch::Tensor add_noise(const torch::Tensor& z0, int t, const torch::Tensor& eps) const;

  // Per-sample alpha_bar as a broadcastable [B,1,1,1] tensor.
  torch::Tensor alpha_bar_tensor(const std::vector<int>& t, torch::Dtype dtype) const;

private:
  std::vector<double> betas_;
  std::vector<double> alpha_bars_;  // index 0..T
};

}  // namespace drivegen
