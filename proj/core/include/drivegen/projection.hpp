// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "drivegen/camera.hpp"
#include "drivegen/scene.hpp"

namespace drivegen {

// Shared camera model: renders, label maps, and condition images all project
// through this one path.
class Projector {
public:
  explicit Projector(const Camera& cam);

  const Vec3& center() const { return center_; }
  // Ego-frame direction of the ray through pixel center (ix+0.5, iy+0.5).
  Vec3 ray_dir(int ix, int iy) const;
  // Projects an ego point to (u, v, z_cam); nullopt when behind the near plane.
  std::optional<Vec3> project(const Vec3& p, double near = 0.05) const;

private:
  Camera cam_;
  Mat3 rot_t_;
  Vec3 center_;
};

enum class GroundClass { kNone = 0, kDrivable = 1, kLane = 2, kCrossing = 3 };

struct GroundHit {
  GroundClass cls = GroundClass::kNone;
  int element = -1;  // polygon / polyline index within its class
};

// Bounding-box accelerated map-layer lookup with priority
// crossing > lane > drivable.
class PreparedMap {
public:
  PreparedMap(const BEVScene& scene, double lane_band_width_m);
  GroundHit classify(const Vec2& p) const;

private:
  struct Bounded {
    double xmin, xmax, ymin, ymax;
  };
  const BEVScene& scene_;
  double lane_halfwidth_;
  std::vector<Bounded> drivable_bb_;
  std::vector<Bounded> crossing_bb_;
  std::vector<Bounded> lane_bb_;
};

struct ProjectedBox {
  int object_index = -1;
  double depth = 0.0;          // camera-center to box-center distance
  std::vector<Vec2> hull;      // convex hull in image coordinates
};

// Near-plane-clipped projected silhouettes, painter-sorted far to near.
// Distance ties keep insertion order, so the later element paints on top.
std::vector<ProjectedBox> project_boxes(const BEVScene& scene, const Camera& cam,
                                        double near = 0.05);

// Scanline fill of a convex polygon, clipped to the image; pixel centers at
// (x+0.5, y+0.5).
void fill_convex(const std::vector<Vec2>& hull, int height, int width,
                 const std::function<void(int y, int x)>& fn);

}  // namespace drivegen
