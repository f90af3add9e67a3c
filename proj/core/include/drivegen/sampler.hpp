// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <torch/torch.h>

#include <functional>
#include <optional>
#include <vector>

#include "drivegen/image.hpp"
#include "drivegen/model.hpp"
#include "drivegen/rng.hpp"
#include "drivegen/schedule.hpp"

namespace drivegen {

struct SamplerConfig {
  int ddim_steps = 25;
  double cfg_scale = 3.0;
  double eta = 0.0;
};

void validate_sampler_config(const SamplerConfig& config, const NoiseSchedule& schedule);

// Deterministic DDIM timestep subsequence: round(k*T/S) for k = S..1,
// stepping down to alpha_bar(0) = 1.
std::vector<int> ddim_timesteps(int ddim_steps, int timesteps);

// Low-level trajectory driver over an arbitrary eps predictor; used directly
// by tests with stub models. noise_rng is only consulted when eta > 0.
using EpsFn = std::function<torch::Tensor(const torch::Tensor& z, int t)>;
torch::Tensor ddim_trajectory(const EpsFn& eps_fn, const NoiseSchedule& schedule,
                              torch::Tensor z_start, const SamplerConfig& config,
                              Rng* noise_rng = nullptr);

struct SampleRequest {
  std::vector<std::vector<int32_t>> tokens;  // conditional caption ids, one per view
  std::optional<torch::Tensor> map_cond;     // [B,3,H,W] unit-scaled
  std::optional<torch::Tensor> box_cond;
  int views_per_scene = 1;
};

// Seeded Gaussian start, classifier-free guidance
// eps = eps_u + s (eps_c - eps_u) with text and geometric conditions dropped
// together on the unconditional branch (at s = 1 the unconditional branch is
// skipped: the combination is identically the conditional prediction).
// Returns decoded latents [B,3,H,W] in [-1,1].
torch::Tensor ddim_sample_latents(DiffusionModel& model, const SampleRequest& request,
                                  const SamplerConfig& config, uint64_t seed);

std::vector<Image> ddim_sample(DiffusionModel& model, const SampleRequest& request,
                               const SamplerConfig& config, uint64_t seed);

}  // namespace drivegen
