// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "drivegen/camera.hpp"
#include "drivegen/image.hpp"
#include "drivegen/render.hpp"
#include "drivegen/scene.hpp"

namespace drivegen {

// Binary masks at latent resolution (pixel resolution / 8). Values are 0/1;
// the three masks partition every cell, with box priority on overlap.
struct RegionMasks {
  GrayImage m_map;
  GrayImage m_box;
  GrayImage m_bg;
};

struct ConditionBundle {
  std::vector<Image> map_images;       // per view, map classes color-coded
  std::vector<Image> box_images;       // per view, 10 category colors
  std::vector<RegionMasks> masks;      // per view
};

inline constexpr int kLatentDownsample = 8;

// Color-coded map layers projected with the shared camera model; priority
// crossing > lane > drivable, black background. No occlusion by boxes.
std::vector<Image> rasterize_map_condition(const BEVScene& scene, const CameraRig& rig,
                                           const RenderParams& params = {});

// Category-colored box silhouettes; nearer boxes overdraw farther ones.
std::vector<Image> rasterize_box_condition(const BEVScene& scene, const CameraRig& rig,
                                           const RenderParams& params = {});

// Max-pools pixel-space class coverage into latent cells. latent_h/latent_w
// must equal the rig resolution divided by 8; throws ConfigError otherwise.
std::vector<RegionMasks> make_region_masks(const BEVScene& scene, const CameraRig& rig,
                                           int latent_h, int latent_w,
                                           const RenderParams& params = {});

// One-pass convenience producing images and masks together.
ConditionBundle make_condition_bundle(const BEVScene& scene, const CameraRig& rig,
                                      const RenderParams& params = {});

}  // namespace drivegen
