// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#include "drivegen/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace drivegen {

Projector::Projector(const Camera& cam) : cam_(cam), rot_t_(cam.rotation.transpose()) {
  center_ = cam.center_ego();
}

Vec3 Projector::ray_dir(int ix, int iy) const {
  Vec3 d_cam{(ix + 0.5 - cam_.cx) / cam_.fx, (iy + 0.5 - cam_.cy) / cam_.fy, 1.0};
  return rot_t_ * d_cam;
}

std::optional<Vec3> Projector::project(const Vec3& p, double near) const {
  Vec3 pc = cam_.rotation * p + cam_.translation;
  if (pc.z <= near) return std::nullopt;
  return Vec3{cam_.fx * pc.x / pc.z + cam_.cx, cam_.fy * pc.y / pc.z + cam_.cy, pc.z};
}

namespace {

template <typename Pts>
void grow_bbox(double& xmin, double& xmax, double& ymin, double& ymax, const Pts& pts,
               double pad = 0.0) {
  for (const auto& v : pts) {
    xmin = std::min(xmin, v.x - pad);
    xmax = std::max(xmax, v.x + pad);
    ymin = std::min(ymin, v.y - pad);
    ymax = std::max(ymax, v.y + pad);
  }
}

}  // namespace

PreparedMap::PreparedMap(const BEVScene& scene, double lane_band_width_m)
    : scene_(scene), lane_halfwidth_(lane_band_width_m * 0.5) {
  auto make_bbox = [](const auto& pts, double pad) {
    Bounded b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
              std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    grow_bbox(b.xmin, b.xmax, b.ymin, b.ymax, pts, pad);
    return b;
  };
  for (const auto& p : scene.drivable_polygons) drivable_bb_.push_back(make_bbox(p, 0.0));
  for (const auto& p : scene.crossing_polygons) crossing_bb_.push_back(make_bbox(p, 0.0));
  for (const auto& l : scene.lane_polylines) lane_bb_.push_back(make_bbox(l, lane_halfwidth_));
}

GroundHit PreparedMap::classify(const Vec2& p) const {
  auto in_bbox = [&](const Bounded& b) {
    return p.x >= b.xmin && p.x <= b.xmax && p.y >= b.ymin && p.y <= b.ymax;
  };
  for (size_t i = 0; i < scene_.crossing_polygons.size(); ++i) {
    if (in_bbox(crossing_bb_[i]) && point_in_polygon(p, scene_.crossing_polygons[i]))
      return {GroundClass::kCrossing, static_cast<int>(i)};
  }
  for (size_t i = 0; i < scene_.lane_polylines.size(); ++i) {
    if (in_bbox(lane_bb_[i]) &&
        point_polyline_distance(p, scene_.lane_polylines[i]) <= lane_halfwidth_)
      return {GroundClass::kLane, static_cast<int>(i)};
  }
  for (size_t i = 0; i < scene_.drivable_polygons.size(); ++i) {
    if (in_bbox(drivable_bb_[i]) && point_in_polygon(p, scene_.drivable_polygons[i]))
      return {GroundClass::kDrivable, static_cast<int>(i)};
  }
  return {GroundClass::kNone, -1};
}

std::vector<ProjectedBox> project_boxes(const BEVScene& scene, const Camera& cam, double near) {
  std::vector<ProjectedBox> out;
  Vec3 cam_center;
  {
    Mat3 rt = cam.rotation.transpose();
    cam_center = rt * (cam.translation * -1.0);
  }
  static const int kEdges[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                                    {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};
  for (size_t i = 0; i < scene.objects.size(); ++i) {
    const auto& box = scene.objects[i];
    auto corners = box.corners();
    std::array<Vec3, 8> cam_pts;
    for (int k = 0; k < 8; ++k) cam_pts[k] = cam.rotation * corners[k] + cam.translation;

    std::vector<Vec3> front;  // camera-frame points with z > near
    for (const auto& p : cam_pts)
      if (p.z > near) front.push_back(p);
    if (front.size() < 8) {
      for (const auto& e : kEdges) {
        const Vec3& a = cam_pts[e[0]];
        const Vec3& b = cam_pts[e[1]];
        if ((a.z - near) * (b.z - near) < 0) {
          double t = (near - a.z) / (b.z - a.z);
          front.push_back(a + (b - a) * t);
        }
      }
    }
    if (front.size() < 3) continue;

    std::vector<Vec2> img_pts;
    img_pts.reserve(front.size());
    for (const auto& p : front)
      img_pts.push_back({cam.fx * p.x / p.z + cam.cx, cam.fy * p.y / p.z + cam.cy});
    auto hull = convex_hull(std::move(img_pts));
    if (hull.size() < 3) continue;

    ProjectedBox pb;
    pb.object_index = static_cast<int>(i);
    pb.depth = (box.center - cam_center).norm();
    pb.hull = std::move(hull);
    out.push_back(std::move(pb));
  }
  // Far to near; stable keeps insertion order for ties.
  std::stable_sort(out.begin(), out.end(),
                   [](const ProjectedBox& a, const ProjectedBox& b) { return a.depth > b.depth; });
  return out;
}

void fill_convex(const std::vector<Vec2>& hull, int height, int width,
                 const std::function<void(int, int)>& fn) {
  if (hull.size() < 3) return;
  double ymin = hull[0].y, ymax = hull[0].y;
  for (const auto& v : hull) {
    ymin = std::min(ymin, v.y);
    ymax = std::max(ymax, v.y);
  }
  int y0 = std::max(0, static_cast<int>(std::floor(ymin - 0.5)));
  int y1 = std::min(height - 1, static_cast<int>(std::ceil(ymax)));
  size_t n = hull.size();
  for (int y = y0; y <= y1; ++y) {
    double yc = y + 0.5;
    double xlo = std::numeric_limits<double>::infinity();
    double xhi = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (size_t i = 0; i < n; ++i) {
      const Vec2& a = hull[i];
      const Vec2& b = hull[(i + 1) % n];
      if ((a.y <= yc && b.y > yc) || (b.y <= yc && a.y > yc)) {
        double t = (yc - a.y) / (b.y - a.y);
        double x = a.x + t * (b.x - a.x);
        xlo = std::min(xlo, x);
        xhi = std::max(xhi, x);
        any = true;
      }
    }
    if (!any) continue;
    int x0 = std::max(0, static_cast<int>(std::floor(xlo - 0.5)));
    int x1 = std::min(width - 1, static_cast<int>(std::ceil(xhi)));
    for (int x = x0; x <= x1; ++x) {
      double xc = x + 0.5;
      if (xc >= xlo && xc <= xhi) fn(y, x);
    }
  }
}

}  // namespace drivegen
