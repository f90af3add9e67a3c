// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#include "drivegen/sampler.hpp"

#include <cmath>

#include "drivegen/errors.hpp"

namespace drivegen {

void validate_sampler_config(const SamplerConfig& config, const NoiseSchedule& schedule) {
  if (config.ddim_steps < 1 || config.ddim_steps > schedule.timesteps())
    throw ConfigError("ddim_steps must be in [1, T]");
  if (config.cfg_scale < 0) throw ConfigError("cfg_scale must be >= 0");
  if (config.eta < 0) throw ConfigError("eta must be >= 0");
}

std::vector<int> ddim_timesteps(int ddim_steps, int timesteps) {
  std::vector<int> taus(ddim_steps);
  for (int k = 1; k <= ddim_steps; ++k) {
    taus[k - 1] = static_cast<int>(
        std::lround(static_cast<double>(k) * timesteps / ddim_steps));
  }
  return taus;  // ascending, taus.back() == T
}

torch::Tensor ddim_trajectory(const EpsFn& eps_fn, const NoiseSchedule& schedule,
                              torch::Tensor z_start, const SamplerConfig& config,
                              Rng* noise_rng) {
  validate_sampler_config(config, schedule);
  auto taus = ddim_timesteps(config.ddim_steps, schedule.timesteps());
  torch::Tensor z = z_start;
  for (int k = static_cast<int>(taus.size()) - 1; k >= 0; --k) {
    const int t = taus[k];
    const int t_prev = k > 0 ? taus[k - 1] : 0;
    const double ab_t = schedule.alpha_bar(t);
    const double ab_p = schedule.alpha_bar(t_prev);
    auto eps = eps_fn(z, t);
    auto x0 = (z - std::sqrt(1.0 - ab_t) * eps) / std::sqrt(ab_t);
    double sigma = 0.0;
    if (config.eta > 0.0 && t_prev > 0) {
      sigma = config.eta * std::sqrt((1.0 - ab_p) / (1.0 - ab_t)) *
              std::sqrt(1.0 - ab_t / ab_p);
    }
    double dir_coeff = std::sqrt(std::max(1.0 - ab_p - sigma * sigma, 0.0));
    z = std::sqrt(ab_p) * x0 + dir_coeff * eps;
    if (sigma > 0.0) {
      auto noise = torch::empty_like(z);
      if (noise_rng) {
        if (z.scalar_type() == torch::kFloat64) {
          noise_rng->fill_normal(noise.data_ptr<double>(), static_cast<size_t>(noise.numel()));
        } else {
          noise_rng->fill_normal(noise.data_ptr<float>(), static_cast<size_t>(noise.numel()));
        }
      } else {
        noise.zero_();
      }
      z = z + sigma * noise;
    }
  }
  return z;
}

torch::Tensor ddim_sample_latents(DiffusionModel& model, const SampleRequest& request,
                                  const SamplerConfig& config, uint64_t seed) {
  torch::NoGradGuard no_grad;
  const auto& mc = model->config();
  validate_sampler_config(config, model->schedule());
  const int64_t batch = static_cast<int64_t>(request.tokens.size());
  if (batch == 0) throw UsageError("empty sample request");

  auto text_c = model->encode_text(request.tokens);
  std::optional<AdapterFeatures> map_feat, box_feat;
  if (request.map_cond) map_feat = model->run_map_adapter(*request.map_cond);
  if (request.box_cond) box_feat = model->run_box_adapter(*request.box_cond);

  torch::Tensor text_u;
  const bool use_uncond = config.cfg_scale != 1.0;
  if (use_uncond) text_u = model->encode_empty_text(batch);

  Rng rng = substream(seed, "sampler");
  auto z = torch::empty({batch, kLatentChannels, mc.latent_h(), mc.latent_w()},
                        torch::TensorOptions().dtype(mc.torch_dtype()));
  if (z.scalar_type() == torch::kFloat64) {
    rng.fill_normal(z.data_ptr<double>(), static_cast<size_t>(z.numel()));
  } else {
    rng.fill_normal(z.data_ptr<float>(), static_cast<size_t>(z.numel()));
  }

  EpsFn eps_fn = [&](const torch::Tensor& zt, int t) {
    std::vector<int> ts(static_cast<size_t>(batch), t);
    auto eps_c = model->predict_eps(zt, ts, text_c, map_feat, box_feat,
                                    request.views_per_scene, true);
    if (!use_uncond) return eps_c;
    auto eps_u = model->predict_eps(zt, ts, text_u, std::nullopt, std::nullopt,
                                    request.views_per_scene, true);
    return eps_u + config.cfg_scale * (eps_c - eps_u);
  };

  Rng noise_rng = substream(seed, "sampler-eta");
  auto z0 = ddim_trajectory(eps_fn, model->schedule(), z, config, &noise_rng);
  return decode_latent(z0);
}

std::vector<Image> ddim_sample(DiffusionModel& model, const SampleRequest& request,
                               const SamplerConfig& config, uint64_t seed) {
  auto pixels = ddim_sample_latents(model, request, config, seed);
  std::vector<Image> out;
  out.reserve(static_cast<size_t>(pixels.size(0)));
  for (int64_t i = 0; i < pixels.size(0); ++i) out.push_back(tensor_to_image(pixels[i]));
  return out;
}

}  // namespace drivegen
