// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#include "drivegen/render.hpp"

#include <cmath>

#include "drivegen/errors.hpp"
#include "drivegen/projection.hpp"
#include "drivegen/rng.hpp"

namespace drivegen {

namespace {

inline uint64_t hash_cell(uint64_t seed, int kind, int id, int64_t cx, int64_t cy) {
  uint64_t x = seed;
  x ^= 0x9e3779b97f4a7c15ull + static_cast<uint64_t>(kind) * 0xbf58476d1ce4e5b9ull;
  x ^= static_cast<uint64_t>(static_cast<int64_t>(id)) * 0x94d049bb133111ebull;
  x ^= static_cast<uint64_t>(cx) * 0xd6e8feb86659fd93ull;
  x ^= static_cast<uint64_t>(cy) * 0xa5a3564e1fe4c9f1ull;
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

inline uint8_t add_noise(uint8_t v, double n) {
  return static_cast<uint8_t>(std::clamp(std::lround(v + n), 0l, 255l));
}

// Noise kinds keep ground layers and boxes in separate hash domains.
enum NoiseKind { kNoiseTerrain = 0, kNoiseDrivable, kNoiseLane, kNoiseCrossing, kNoiseBox };

void check_resolution(const CameraRig& rig) {
  for (const auto& cam : rig.cameras) {
    if (cam.height % 16 != 0 || cam.width % 16 != 0)
      throw ConfigError("render resolution must be a multiple of 16, got " +
                        std::to_string(cam.height) + "x" + std::to_string(cam.width));
  }
}

}  // namespace

double texture_noise(uint64_t seed, int kind, int id, int64_t cell_x, int64_t cell_y,
                     double amplitude) {
  uint64_t h = hash_cell(seed, kind, id, cell_x, cell_y);
  double unit = static_cast<double>(h >> 11) * 0x1.0p-53;  // [0, 1)
  return amplitude * (2.0 * unit - 1.0);
}

RenderResult render_scene(const BEVScene& scene, const CameraRig& rig,
                          const RenderParams& params) {
  validate_rig(rig);
  check_resolution(rig);

  RenderResult result;
  result.views.reserve(rig.cameras.size());
  PreparedMap map(scene, params.lane_band_width_m);

  for (const auto& cam : rig.cameras) {
    ViewRender view;
    const int h = cam.height, w = cam.width;
    view.image = Image(h, w);
    view.labels = GrayImage(h, w, static_cast<uint8_t>(SemanticClass::kBackground));
    view.object_pixels.assign(scene.objects.size(), 0);
    std::vector<int32_t> owner(static_cast<size_t>(h) * w, -1);

    Projector proj(cam);
    const Vec3 c = proj.center();

    // Ground and sky.
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        Vec3 d = proj.ray_dir(x, y);
        Rgb color;
        SemanticClass cls = SemanticClass::kBackground;
        if (d.z < -1e-9) {
          double s = -c.z / d.z;
          Vec3 g = c + d * s;
          double dist = (g - c).norm();
          GroundHit hit{GroundClass::kNone, -1};
          if (dist <= params.far_m) hit = map.classify({g.x, g.y});
          int64_t cx = static_cast<int64_t>(std::floor(g.x / params.texture_cell_m));
          int64_t cy = static_cast<int64_t>(std::floor(g.y / params.texture_cell_m));
          switch (hit.cls) {
            case GroundClass::kCrossing:
              color = palette::kCrossing;
              cls = SemanticClass::kRoad;
              break;
            case GroundClass::kLane:
              color = palette::kLane;
              cls = SemanticClass::kRoad;
              break;
            case GroundClass::kDrivable:
              color = palette::kDrivable;
              cls = SemanticClass::kRoad;
              break;
            case GroundClass::kNone:
              color = palette::kTerrain;
              break;
          }
          double n = texture_noise(params.noise_seed, static_cast<int>(hit.cls) + kNoiseTerrain,
                                   hit.element, cx, cy, params.texture_amplitude);
          color = {add_noise(color.r, n), add_noise(color.g, n), add_noise(color.b, n)};
        } else {
          color = palette::kSky;
        }
        view.image.at(y, x) = color;
        view.labels.at(y, x) = static_cast<uint8_t>(cls);
      }
    }

    // Boxes, far to near.
    for (const auto& pb : project_boxes(scene, cam, params.near_m)) {
      const auto& box = scene.objects[pb.object_index];
      Rgb base = palette::kCategory[static_cast<int>(box.category)];
      SemanticClass cls = category_class(box.category);
      fill_convex(pb.hull, h, w, [&](int y, int x) {
        int64_t cx = static_cast<int64_t>(std::floor(x / params.texture_cell_px));
        int64_t cy = static_cast<int64_t>(std::floor(y / params.texture_cell_px));
        double n = texture_noise(params.noise_seed, kNoiseBox, pb.object_index, cx, cy,
                                 params.texture_amplitude);
        view.image.at(y, x) = {add_noise(base.r, n), add_noise(base.g, n), add_noise(base.b, n)};
        view.labels.at(y, x) = static_cast<uint8_t>(cls);
        owner[static_cast<size_t>(y) * w + x] = pb.object_index;
      });
    }

    for (int32_t id : owner) {
      if (id >= 0) {
        ++view.object_pixels[id];
        ++view.category_pixels[static_cast<int>(scene.objects[id].category)];
      }
    }

    // Global attrs tint last.
    TintFactors tint = tint_factors(scene.attrs);
    for (auto& px : view.image.pixels()) px = apply_tint(px, tint);

    result.views.push_back(std::move(view));
  }
  return result;
}

std::vector<Image> render_views(const BEVScene& scene, const CameraRig& rig,
                                const RenderParams& params) {
  auto res = render_scene(scene, rig, params);
  std::vector<Image> out;
  out.reserve(res.views.size());
  for (auto& v : res.views) out.push_back(std::move(v.image));
  return out;
}

std::vector<GrayImage> semantic_oracle(const BEVScene& scene, const CameraRig& rig,
                                       const RenderParams& params) {
  auto res = render_scene(scene, rig, params);
  std::vector<GrayImage> out;
  out.reserve(res.views.size());
  for (auto& v : res.views) out.push_back(std::move(v.labels));
  return out;
}

}  // namespace drivegen
