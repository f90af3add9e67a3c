// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <vector>

namespace drivegen {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::sqrt(x * x + y * y); }
  Vec2 perp() const { return {-y, x}; }
  Vec2 normalized() const {
    double n = norm();
    return n > 0 ? Vec2{x / n, y / n} : Vec2{0, 0};
  }
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

// Row-major 3x3 matrix; enough for camera extrinsics.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Mat3 identity() { return {}; }
  static Mat3 rot_z(double yaw);
  static Mat3 rot_x(double angle);
  Mat3 transpose() const;
  Mat3 operator*(const Mat3& o) const;
  Vec3 operator*(const Vec3& v) const;
  // Max deviation of M*M^T from identity; used for orthonormality checks.
  double orthonormality_error() const;
};

using Polygon = std::vector<Vec2>;
using Polyline = std::vector<Vec2>;

// Signed area (positive for counter-clockwise winding).
double polygon_signed_area(const Polygon& poly);
double polygon_area(const Polygon& poly);

// Strict non-self-intersection test: no two non-adjacent edges intersect and
// adjacent edges meet only at the shared vertex. O(n^2).
bool is_simple_polygon(const Polygon& poly);

// Ray-crossing test; boundary points count as inside.
bool point_in_polygon(const Vec2& p, const Polygon& poly);

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);
double point_polyline_distance(const Vec2& p, const Polyline& line);

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

// 2D convex hull (monotone chain), CCW order without repeated endpoint.
std::vector<Vec2> convex_hull(std::vector<Vec2> pts);

// Approximate area of a union of polygons by grid sampling over the common
// bounding box. Test-oracle quality: resolution ~ cells x cells samples.
double union_area_grid(const std::vector<Polygon>& polys, int cells = 512);

// Regular polygon approximating a circle.
Polygon circle_polygon(const Vec2& center, double radius, int segments = 32);

// Axis band [a, b] extruded sideways by width/2 on each side.
Polygon segment_band(const Vec2& a, const Vec2& b, double width);

}  // namespace drivegen
