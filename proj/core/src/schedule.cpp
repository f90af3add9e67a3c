// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#include "drivegen/schedule.hpp"

#include "drivegen/errors.hpp"

namespace drivegen {

NoiseSchedule::NoiseSchedule(const ScheduleConfig& config) {
  if (config.timesteps < 1) throw ConfigError("schedule needs at least one timestep");
  if (!(config.beta_start > 0) || !(config.beta_end < 1) || config.beta_start > config.beta_end)
    throw ConfigError("betas must satisfy 0 < beta_start <= beta_end < 1");
  betas_.resize(config.timesteps);
  alpha_bars_.resize(config.timesteps + 1);
  alpha_bars_[0] = 1.0;
  double prod = 1.0;
  for (int i = 0; i < config.timesteps; ++i) {
    double frac = config.timesteps == 1 ? 0.0 : static_cast<double>(i) / (config.timesteps - 1);
    betas_[i] = config.beta_start + (config.beta_end - config.beta_start) * frac;
    prod *= 1.0 - betas_[i];
    alpha_bars_[i + 1] = prod;
  }
}

double NoiseSchedule::beta(int t) const {
  if (t < 1 || t > timesteps()) throw UsageError("beta index out of range: " + std::to_string(t));
  return betas_[t - 1];
}

double NoiseSchedule::alpha_bar(int t) const {
  if (t < 0 || t > timesteps())
    throw UsageError("alpha_bar index out of range: " + std::to_string(t));
  return alpha_bars_[t];
}

torch::Tensor NoiseSchedule::alpha_bar_tensor(const std::vector<int>& t,
                                              torch::Dtype dtype) const {
  std::vector<double> vals;
  vals.reserve(t.size());
  for (int ti : t) vals.push_back(alpha_bar(ti));
  return torch::tensor(vals, torch::TensorOptions().dtype(torch::kFloat64))
      .to(dtype)
      .view({static_cast<long>(t.size()), 1, 1, 1});
}

torch::Tensor NoiseSchedule::add_noise(const torch::Tensor& z0, const std::vector<int>& t,
                                       const torch::Tensor& eps) const {
  if (z0.sizes() != eps.sizes()) throw UsageError("z0 and eps shapes differ");
  if (static_cast<long>(t.size()) != z0.size(0))
    throw UsageError("one timestep per batch element required");
  auto ab = alpha_bar_tensor(t, z0.scalar_type());
  return ab.sqrt() * z0 + (1.0 - ab).sqrt() * eps;
}

torch::Tensor NoiseSchedule::add_noise(const torch::Tensor& z0, int t,
                                       const torch::Tensor& eps) const {
  return add_noise(z0, std::vector<int>(z0.size(0), t), eps);
}

}  // namespace drivegen
