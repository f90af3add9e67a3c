// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "drivegen/camera.hpp"
#include "drivegen/caption.hpp"
#include "drivegen/model.hpp"
#include "drivegen/objectives.hpp"
#include "drivegen/phase.hpp"
#include "drivegen/render.hpp"
#include "drivegen/sampler.hpp"
#include "drivegen/scene.hpp"

namespace drivegen {

struct RigSpec {
  int views = 6;
  int image_h = 128;
  int image_w = 256;
  double fov_deg = 90.0;
  double camera_height_m = 1.5;
};

struct TrainParams {
  double lr = 6e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double weight_decay = 0.01;
  int batch_scenes = 4;
  double cond_dropout = 0.1;
  long checkpoint_interval = 2000;
  bool denoiser_trainable_stage2 = true;
};

struct CaptionConfig {
  int min_visible_area_px = 50;
  int max_spatial_objects = 2;
  std::string vlm_endpoint;  // empty -> template captioner
  int vlm_retries = 2;
};

struct EvalConfig {
  double palette_delta = 60.0 / 255.0;
  int proxy_dim = 64;
  uint64_t proxy_seed = 99;
};

struct DataConfig {
  int count = 2000;
  double val_fraction = 0.1;
};

// Single experiment configuration; every produced artifact embeds its hash.
struct ExperimentConfig {
  uint64_t seed = 7;
  WorldSpec world;
  RigSpec rig;
  ModelConfig model;  // image size and views mirrored from rig on load
  PhaseSchedule schedule;
  LossWeights loss;
  FrequencyFilterConfig freq;
  SamplerConfig sampler;
  TrainParams train;
  CaptionConfig caption;
  EvalConfig eval;
  RenderParams render;
  DataConfig data;

  CameraRig make_camera_rig() const;
  CaptionParams caption_params() const;
};

ExperimentConfig default_config();

// Strict parse: unknown keys are rejected with their full path; missing keys
// take defaults. Throws ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config_file(const std::filesystem::path& path);

// Content hash of the canonical JSON form (hex).
std::string config_hash(const ExperimentConfig& config);

void validate_config(const ExperimentConfig& config);

}  // namespace drivegen
