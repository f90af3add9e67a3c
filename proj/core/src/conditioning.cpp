// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#include "drivegen/conditioning.hpp"

#include <cmath>

#include "drivegen/errors.hpp"
#include "drivegen/palette.hpp"
#include "drivegen/projection.hpp"

namespace drivegen {

namespace {

void check_rig_res(const CameraRig& rig) {
  validate_rig(rig);
  for (const auto& cam : rig.cameras) {
    if (cam.height % 16 != 0 || cam.width % 16 != 0)
      throw ConfigError("condition resolution must be a multiple of 16");
  }
}

Image rasterize_map_view(const BEVScene& scene, const Camera& cam, const PreparedMap& map,
                         const RenderParams& params) {
  Image img(cam.height, cam.width);  // black
  Projector proj(cam);
  const Vec3 c = proj.center();
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      Vec3 d = proj.ray_dir(x, y);
      if (d.z >= -1e-9) continue;
      double s = -c.z / d.z;
      Vec3 g = c + d * s;
      if ((g - c).norm() > params.far_m) continue;
      switch (map.classify({g.x, g.y}).cls) {
        case GroundClass::kCrossing: img.at(y, x) = palette::kCondCrossing; break;
        case GroundClass::kLane: img.at(y, x) = palette::kCondLane; break;
        case GroundClass::kDrivable: img.at(y, x) = palette::kCondDrivable; break;
        case GroundClass::kNone: break;
      }
    }
  }
  return img;
}

Image rasterize_box_view(const BEVScene& scene, const Camera& cam, const RenderParams& params) {
  Image img(cam.height, cam.width);  // black
  for (const auto& pb : project_boxes(scene, cam, params.near_m)) {
    Rgb color = palette::kCondCategory[static_cast<int>(scene.objects[pb.object_index].category)];
    fill_convex(pb.hull, cam.height, cam.width, [&](int y, int x) { img.at(y, x) = color; });
  }
  return img;
}

bool non_black(const Rgb& c) { return c.r | c.g | c.b; }

RegionMasks pool_masks(const Image& map_img, const Image& box_img, int latent_h, int latent_w) {
  RegionMasks m;
  m.m_map = GrayImage(latent_h, latent_w, 0);
  m.m_box = GrayImage(latent_h, latent_w, 0);
  m.m_bg = GrayImage(latent_h, latent_w, 0);
  for (int cy = 0; cy < latent_h; ++cy) {
    for (int cx = 0; cx < latent_w; ++cx) {
      bool any_map = false, any_box = false;
      for (int dy = 0; dy < kLatentDownsample && !(any_map && any_box); ++dy) {
        for (int dx = 0; dx < kLatentDownsample; ++dx) {
          int y = cy * kLatentDownsample + dy;
          int x = cx * kLatentDownsample + dx;
          any_map |= non_black(map_img.at(y, x));
          any_box |= non_black(box_img.at(y, x));
        }
      }
      // Box priority on overlap; the three masks partition the cell set.
      uint8_t box = any_box ? 1 : 0;
      uint8_t map = (any_map && !any_box) ? 1 : 0;
      m.m_box.at(cy, cx) = box;
      m.m_map.at(cy, cx) = map;
      m.m_bg.at(cy, cx) = static_cast<uint8_t>(1 - std::max(map, box));
    }
  }
  return m;
}

}  // namespace

std::vector<Image> rasterize_map_condition(const BEVScene& scene, const CameraRig& rig,
                                           const RenderParams& params) {
  check_rig_res(rig);
  PreparedMap map(scene, params.lane_band_width_m);
  std::vector<Image> out;
  out.reserve(rig.cameras.size());
  for (const auto& cam : rig.cameras) out.push_back(rasterize_map_view(scene, cam, map, params));
  return out;
}

std::vector<Image> rasterize_box_condition(const BEVScene& scene, const CameraRig& rig,
                                           const RenderParams& params) {
  check_rig_res(rig);
  std::vector<Image> out;
  out.reserve(rig.cameras.size());
  for (const auto& cam : rig.cameras) out.push_back(rasterize_box_view(scene, cam, params));
  return out;
}

std::vector<RegionMasks> make_region_masks(const BEVScene& scene, const CameraRig& rig,
                                           int latent_h, int latent_w,
                                           const RenderParams& params) {
  check_rig_res(rig);
  for (const auto& cam : rig.cameras) {
    if (cam.height % kLatentDownsample != 0 || cam.width % kLatentDownsample != 0)
      throw ConfigError("pixel resolution not divisible by the latent factor");
    if (cam.height / kLatentDownsample != latent_h || cam.width / kLatentDownsample != latent_w)
      throw ConfigError("latent resolution must equal pixel resolution / 8");
  }
  auto bundle = make_condition_bundle(scene, rig, params);
  std::vector<RegionMasks> out;
  out.reserve(bundle.masks.size());
  for (auto& m : bundle.masks) out.push_back(std::move(m));
  return out;
}

ConditionBundle make_condition_bundle(const BEVScene& scene, const CameraRig& rig,
                                      const RenderParams& params) {
  check_rig_res(rig);
  ConditionBundle bundle;
  PreparedMap map(scene, params.lane_band_width_m);
  for (const auto& cam : rig.cameras) {
    Image map_img = rasterize_map_view(scene, cam, map, params);
    Image box_img = rasterize_box_view(scene, cam, params);
    bundle.masks.push_back(pool_masks(map_img, box_img, cam.height / kLatentDownsample,
                                      cam.width / kLatentDownsample));
    bundle.map_images.push_back(std::move(map_img));
    bundle.box_images.push_back(std::move(box_img));
  }
  return bundle;
}

}  // namespace drivegen
