// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#include "drivegen/geometry.hpp"

#include <algorithm>
#include <limits>

namespace drivegen {

Mat3 Mat3::rot_z(double yaw) {
  double c = std::cos(yaw), s = std::sin(yaw);
  Mat3 r;
  r.m = {c, -s, 0, s, c, 0, 0, 0, 1};
  return r;
}

Mat3 Mat3::rot_x(double angle) {
  double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r.m = {1, 0, 0, 0, c, -s, 0, s, c};
  return r;
}

Mat3 Mat3::transpose() const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.m[i * 3 + j] = m[j * 3 + i];
  return r;
}

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0;
      for (int k = 0; k < 3; ++k) s += m[i * 3 + k] * o.m[k * 3 + j];
      r.m[i * 3 + j] = s;
    }
  return r;
}

Vec3 Mat3::operator*(const Vec3& v) const {
  return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
          m[3] * v.x + m[4] * v.y + m[5] * v.z,
          m[6] * v.x + m[7] * v.y + m[8] * v.z};
}

double Mat3::orthonormality_error() const {
  Mat3 mt = transpose();
  Mat3 p = (*this) * mt;
  double err = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double want = (i == j) ? 1.0 : 0.0;
      err = std::max(err, std::abs(p.m[i * 3 + j] - want));
    }
  return err;
}

double polygon_signed_area(const Polygon& poly) {
  double a = 0;
  size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % n];
    a += p.cross(q);
  }
  return 0.5 * a;
}

double polygon_area(const Polygon& poly) { return std::abs(polygon_signed_area(poly)); }

namespace {

int orientation(const Vec2& a, const Vec2& b, const Vec2& c) {
  double v = (b - a).cross(c - a);
  if (v > 1e-12) return 1;
  if (v < -1e-12) return -1;
  return 0;
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x, b.x) - 1e-12 <= p.x && p.x <= std::max(a.x, b.x) + 1e-12 &&
         std::min(a.y, b.y) - 1e-12 <= p.y && p.y <= std::max(a.y, b.y) + 1e-12;
}

}  // namespace

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  int o1 = orientation(a, b, c);
  int o2 = orientation(a, b, d);
  int o3 = orientation(c, d, a);
  int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

bool is_simple_polygon(const Polygon& poly) {
  size_t n = poly.size();
  if (n < 3) return false;
  if (polygon_area(poly) <= 1e-12) return false;
  for (size_t i = 0; i < n; ++i) {
    Vec2 a = poly[i], b = poly[(i + 1) % n];
    if ((b - a).norm() < 1e-12) return false;
    for (size_t j = i + 1; j < n; ++j) {
      // Skip edges sharing a vertex with edge i.
      if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
      Vec2 c = poly[j], d = poly[(j + 1) % n];
      if (segments_intersect(a, b, c, d)) return false;
    }
  }
  return true;
}

bool point_in_polygon(const Vec2& p, const Polygon& poly) {
  size_t n = poly.size();
  if (n < 3) return false;
  bool inside = false;
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    // Boundary counts as inside.
    if (orientation(a, b, p) == 0 && on_segment(a, b, p)) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      double t = (p.y - a.y) / (b.y - a.y);
      double xcross = a.x + t * (b.x - a.x);
      if (p.x < xcross) inside = !inside;
    }
  }
  return inside;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  Vec2 ab = b - a;
  double len2 = ab.dot(ab);
  if (len2 <= 0) return (p - a).norm();
  double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + ab * t)).norm();
}

double point_polyline_distance(const Vec2& p, const Polyline& line) {
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i + 1 < line.size(); ++i) {
    best = std::min(best, point_segment_distance(p, line[i], line[i + 1]));
  }
  return best;
}

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  if (pts.size() < 3) return pts;
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  std::vector<Vec2> hull(2 * pts.size());
  size_t k = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && (hull[k - 1] - hull[k - 2]).cross(pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  size_t lower = k + 1;
  for (size_t i = pts.size() - 1; i-- > 0;) {
    while (k >= lower && (hull[k - 1] - hull[k - 2]).cross(pts[i] - hull[k - 2]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double union_area_grid(const std::vector<Polygon>& polys, int cells) {
  if (polys.empty()) return 0.0;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& poly : polys)
    for (const auto& v : poly) {
      xmin = std::min(xmin, v.x);
      xmax = std::max(xmax, v.x);
      ymin = std::min(ymin, v.y);
      ymax = std::max(ymax, v.y);
    }
  if (!(xmax > xmin) || !(ymax > ymin)) return 0.0;
  double dx = (xmax - xmin) / cells, dy = (ymax - ymin) / cells;
  long hits = 0;
  for (int iy = 0; iy < cells; ++iy) {
    for (int ix = 0; ix < cells; ++ix) {
      Vec2 p{xmin + (ix + 0.5) * dx, ymin + (iy + 0.5) * dy};
      for (const auto& poly : polys) {
        if (point_in_polygon(p, poly)) {
          ++hits;
          break;
        }
      }
    }
  }
  return static_cast<double>(hits) * dx * dy;
}

Polygon circle_polygon(const Vec2& center, double radius, int segments) {
  Polygon poly;
  poly.reserve(segments);
  for (int i = 0; i < segments; ++i) {
    double a = 2.0 * M_PI * i / segments;
    poly.push_back({center.x + radius * std::cos(a), center.y + radius * std::sin(a)});
  }
  return poly;
}

Polygon segment_band(const Vec2& a, const Vec2& b, double width) {
  Vec2 dir = (b - a).normalized();
  Vec2 n = dir.perp() * (width * 0.5);
  return {a + n, b + n, b - n, a - n};
}

}  // namespace drivegen
