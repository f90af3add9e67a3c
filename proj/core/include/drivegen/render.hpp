// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "drivegen/camera.hpp"
#include "drivegen/image.hpp"
#include "drivegen/palette.hpp"
#include "drivegen/scene.hpp"

namespace drivegen {

struct RenderParams {
  double texture_amplitude = 8.0;  // +- intensity units on 8-bit channels
  double texture_cell_m = 0.5;     // world-anchored noise cell for ground
  double texture_cell_px = 2.0;    // image-space noise cell for boxes
  double lane_band_width_m = 0.45;
  double far_m = 150.0;
  double near_m = 0.05;
  uint64_t noise_seed = 0x5eed;
};

struct ViewRender {
  Image image;
  GrayImage labels;  // SemanticClass per pixel
  std::array<int64_t, kNumCategories> category_pixels{};  // visible pixels per category
  std::vector<int64_t> object_pixels;                     // visible pixels per object
};

struct RenderResult {
  std::vector<ViewRender> views;
};

// Flat-shaded deterministic multi-view rendering: per-pixel ground
// classification shared with the condition rasterizer, painter-ordered box
// silhouettes, world-seeded texture noise, then the global attrs tint.
// Renders and label maps come out of the same pass.
RenderResult render_scene(const BEVScene& scene, const CameraRig& rig,
                          const RenderParams& params = {});

// Convenience wrappers matching the per-output contracts. Image sizes must be
// multiples of 16.
std::vector<Image> render_views(const BEVScene& scene, const CameraRig& rig,
                                const RenderParams& params = {});
std::vector<GrayImage> semantic_oracle(const BEVScene& scene, const CameraRig& rig,
                                       const RenderParams& params = {});

// Deterministic texture-noise offset in [-amplitude, amplitude], keyed by
// (seed, element kind, element id, cell coordinates).
double texture_noise(uint64_t seed, int kind, int id, int64_t cell_x, int64_t cell_y,
                     double amplitude);

}  // namespace drivegen
