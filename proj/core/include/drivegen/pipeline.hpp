// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "drivegen/config.hpp"
#include "drivegen/model.hpp"
#include "drivegen/sampler.hpp"
#include "drivegen/scene.hpp"

namespace drivegen {

// Builds the full conditional sampling request for one scene: rasterized
// map/box conditions plus serialized template captions.
SampleRequest make_sample_request(const BEVScene& scene, const CameraRig& rig,
                                  const ExperimentConfig& config, torch::Dtype dtype);

// Conditions -> DDIM -> decoded per-view images for one scene.
std::vector<Image> generate_scene_images(DiffusionModel& model, const BEVScene& scene,
                                         const CameraRig& rig, const ExperimentConfig& config,
                                         uint64_t seed);

}  // namespace drivegen
