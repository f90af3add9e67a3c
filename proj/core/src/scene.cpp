// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#include "drivegen/scene.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "drivegen/errors.hpp"

namespace drivegen {

namespace {

const std::vector<std::string> kCategoryNames = {
    "car", "bus", "truck", "trailer", "motorcycle", "bicycle",
    "construction vehicle", "pedestrian", "barrier", "traffic cone"};
const std::vector<std::string> kTimeNames = {"daytime", "night", "evening", "dawn", "dusk"};
const std::vector<std::string> kWeatherNames = {"clear", "sunny", "overcast", "cloudy", "foggy",
                                                "rainy", "drizzle", "snowy", "hazy", "stormy"};
const std::vector<std::string> kSurroundingsNames = {
    "urban intersection", "residential street", "multi-lane highway", "construction zone",
    "urban park area",    "commercial area",    "rural area"};
const std::vector<std::string> kTopologyNames = {
    "straight road", "split road",  "left-turn lane", "right-turn lane", "cross-junction",
    "T-junction",    "Y-junction",  "roundabout",     "merging road",    "no road"};

template <typename E>
E enum_from_string(const std::string& s, const std::vector<std::string>& names,
                   const char* what) {
  for (size_t i = 0; i < names.size(); ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  throw ValidationError(std::string("unknown ") + what + ": '" + s + "'");
}

}  // namespace

const std::string& to_string(Category c) { return kCategoryNames[static_cast<size_t>(c)]; }
const std::string& to_string(TimeOfDay t) { return kTimeNames[static_cast<size_t>(t)]; }
const std::string& to_string(Weather w) { return kWeatherNames[static_cast<size_t>(w)]; }
const std::string& to_string(Surroundings s) {
  return kSurroundingsNames[static_cast<size_t>(s)];
}
const std::string& to_string(RoadTopology t) { return kTopologyNames[static_cast<size_t>(t)]; }

Category category_from_string(const std::string& s) {
  return enum_from_string<Category>(s, kCategoryNames, "category");
}
TimeOfDay time_from_string(const std::string& s) {
  return enum_from_string<TimeOfDay>(s, kTimeNames, "time");
}
Weather weather_from_string(const std::string& s) {
  return enum_from_string<Weather>(s, kWeatherNames, "weather");
}
Surroundings surroundings_from_string(const std::string& s) {
  return enum_from_string<Surroundings>(s, kSurroundingsNames, "surroundings");
}
RoadTopology topology_from_string(const std::string& s) {
  return enum_from_string<RoadTopology>(s, kTopologyNames, "road topology");
}

double normalize_yaw(double yaw) {
  double two_pi = 2.0 * M_PI;
  yaw = std::fmod(yaw + M_PI, two_pi);
  if (yaw < 0) yaw += two_pi;
  return yaw - M_PI;
}

Vec3 default_category_size(Category c) {
  switch (c) {
    case Category::kCar: return {4.5, 1.9, 1.6};
    case Category::kBus: return {11.0, 2.9, 3.3};
    case Category::kTruck: return {8.0, 2.5, 3.0};
    case Category::kTrailer: return {10.0, 2.6, 3.6};
    case Category::kMotorcycle: return {2.1, 0.8, 1.4};
    case Category::kBicycle: return {1.8, 0.6, 1.3};
    case Category::kConstructionVehicle: return {6.5, 2.8, 3.2};
    case Category::kPedestrian: return {0.6, 0.6, 1.75};
    case Category::kBarrier: return {2.0, 0.5, 1.0};
    case Category::kTrafficCone: return {0.4, 0.4, 0.75};
  }
  return {1, 1, 1};
}

std::array<Vec3, 8> OrientedBox3D::corners() const {
  std::array<Vec3, 8> out;
  double c = std::cos(yaw), s = std::sin(yaw);
  double hl = size.x * 0.5, hw = size.y * 0.5;
  const double sx[4] = {+1, -1, -1, +1};
  const double sy[4] = {+1, +1, -1, -1};
  for (int i = 0; i < 8; ++i) {
    int k = i % 4;
    double lx = sx[k] * hl, ly = sy[k] * hw;
    double z = center.z + (i < 4 ? -size.z * 0.5 : size.z * 0.5);
    out[i] = {center.x + c * lx - s * ly, center.y + s * lx + c * ly, z};
  }
  return out;
}

std::array<Vec2, 4> OrientedBox3D::footprint() const {
  auto c8 = corners();
  return {Vec2{c8[0].x, c8[0].y}, Vec2{c8[1].x, c8[1].y}, Vec2{c8[2].x, c8[2].y},
          Vec2{c8[3].x, c8[3].y}};
}

void validate_world_spec(const WorldSpec& spec) {
  if (spec.bound_m <= 0) throw ConfigError("world bound must be positive");
  if (spec.object_count_min < 0 || spec.object_count_max > 32 ||
      spec.object_count_min > spec.object_count_max) {
    throw ConfigError("object count range must satisfy 0 <= min <= max <= 32");
  }
  if (spec.off_road_prob < 0 || spec.off_road_prob > 1)
    throw ConfigError("off_road_prob must be in [0, 1]");
  if (spec.topologies.empty()) throw ConfigError("topology set must be non-empty");
  if (spec.times.empty() || spec.weathers.empty() || spec.surroundings.empty())
    throw ConfigError("attribute sets must be non-empty");
  if (spec.categories.empty()) throw ConfigError("category set must be non-empty");
  if (spec.road_width_min <= 0 || spec.road_width_max < spec.road_width_min)
    throw ConfigError("road width range invalid");
  if (spec.object_distance_min < 0 || spec.object_distance_max < spec.object_distance_min)
    throw ConfigError("object distance range invalid");
}

namespace {

// Polygonized band following a polyline (used for arcs).
Polygon polyline_band(const Polyline& line, double width) {
  Polygon left, right;
  for (size_t i = 0; i < line.size(); ++i) {
    Vec2 dir;
    if (i == 0)
      dir = (line[1] - line[0]).normalized();
    else if (i + 1 == line.size())
      dir = (line[i] - line[i - 1]).normalized();
    else
      dir = ((line[i + 1] - line[i - 1])).normalized();
    Vec2 n = dir.perp() * (width * 0.5);
    left.push_back(line[i] + n);
    right.push_back(line[i] - n);
  }
  Polygon poly = left;
  poly.insert(poly.end(), right.rbegin(), right.rend());
  return poly;
}

Polyline arc_polyline(const Vec2& center, double radius, double a0, double a1, int steps = 16) {
  Polyline line;
  for (int i = 0; i <= steps; ++i) {
    double a = a0 + (a1 - a0) * i / steps;
    line.push_back({center.x + radius * std::cos(a), center.y + radius * std::sin(a)});
  }
  return line;
}

struct RoadLayout {
  std::vector<Polygon> drivable;
  std::vector<Polyline> lanes;
  std::vector<Polygon> crossings;
};

void add_crossing_band(RoadLayout& layout, const Vec2& at, const Vec2& road_dir, double road_width) {
  Vec2 n = road_dir.normalized();
  Vec2 a = at - n.perp() * (road_width * 0.55);
  Vec2 b = at + n.perp() * (road_width * 0.55);
  layout.crossings.push_back(segment_band(a, b, 3.0));
}

RoadLayout build_layout(RoadTopology topo, double L, double w, Rng& rng) {
  RoadLayout out;
  auto straight_band = [&](const Vec2& a, const Vec2& b, double width) {
    out.drivable.push_back(segment_band(a, b, width));
  };
  switch (topo) {
    case RoadTopology::kStraight: {
      straight_band({-L, 0}, {L, 0}, w);
      out.lanes.push_back({{-L, -w / 4}, {L, -w / 4}});
      out.lanes.push_back({{-L, +w / 4}, {L, +w / 4}});
      if (rng.bernoulli(0.5)) add_crossing_band(out, {rng.uniform(8, 20), 0}, {1, 0}, w);
      break;
    }
    case RoadTopology::kSplit: {
      double x0 = rng.uniform(6, 14);
      straight_band({-L, 0}, {x0, 0}, w);
      double a = rng.uniform(0.3, 0.5);
      Vec2 d1{std::cos(a), std::sin(a)}, d2{std::cos(a), -std::sin(a)};
      straight_band({x0, 0}, Vec2{x0, 0} + d1 * L, w * 0.8);
      straight_band({x0, 0}, Vec2{x0, 0} + d2 * L, w * 0.8);
      out.lanes.push_back({{-L, 0}, {x0, 0}});
      out.lanes.push_back({{x0, 0}, Vec2{x0, 0} + d1 * L});
      out.lanes.push_back({{x0, 0}, Vec2{x0, 0} + d2 * L});
      break;
    }
    case RoadTopology::kLeftTurn:
    case RoadTopology::kRightTurn: {
      double sign = topo == RoadTopology::kLeftTurn ? 1.0 : -1.0;
      double x0 = rng.uniform(4, 10);
      double radius = rng.uniform(12, 22);
      straight_band({-L, 0}, {x0, 0}, w);
      Vec2 arc_center{x0, sign * radius};
      auto arc = arc_polyline(arc_center, radius, -sign * M_PI / 2,
                              -sign * M_PI / 2 + sign * M_PI / 2, 16);
      out.drivable.push_back(polyline_band(arc, w));
      out.lanes.push_back({{-L, 0}, {x0, 0}});
      out.lanes.push_back(arc);
      break;
    }
    case RoadTopology::kCrossJunction: {
      straight_band({-L, 0}, {L, 0}, w);
      straight_band({0, -L}, {0, L}, w);
      out.lanes.push_back({{-L, -w / 4}, {L, -w / 4}});
      out.lanes.push_back({{-w / 4, -L}, {-w / 4, L}});
      double d = w * 0.5 + 2.5;
      if (rng.bernoulli(0.7)) add_crossing_band(out, {d, 0}, {1, 0}, w);
      if (rng.bernoulli(0.7)) add_crossing_band(out, {-d, 0}, {1, 0}, w);
      if (rng.bernoulli(0.7)) add_crossing_band(out, {0, d}, {0, 1}, w);
      break;
    }
    case RoadTopology::kTJunction: {
      double x0 = rng.uniform(6, 16);
      double side = rng.bernoulli(0.5) ? 1.0 : -1.0;
      straight_band({-L, 0}, {L, 0}, w);
      straight_band({x0, 0}, {x0, side * L}, w * 0.9);
      out.lanes.push_back({{-L, 0}, {L, 0}});
      out.lanes.push_back({{x0, 0}, {x0, side * L}});
      if (rng.bernoulli(0.6)) add_crossing_band(out, {x0 - w * 0.5 - 2.5, 0}, {1, 0}, w);
      break;
    }
    case RoadTopology::kYJunction: {
      double a = rng.uniform(0.4, 0.7);
      straight_band({-L, 0}, {0, 0}, w);
      Vec2 d1{std::cos(a), std::sin(a)}, d2{std::cos(a), -std::sin(a)};
      straight_band({0, 0}, d1 * L, w * 0.9);
      straight_band({0, 0}, d2 * L, w * 0.9);
      out.lanes.push_back({{-L, 0}, {0, 0}});
      out.lanes.push_back({{0, 0}, d1 * L});
      out.lanes.push_back({{0, 0}, d2 * L});
      break;
    }
    case RoadTopology::kRoundabout: {
      double d0 = rng.uniform(14, 20);
      double radius = rng.uniform(9, 13);
      straight_band({-L, 0}, {d0, 0}, w);
      out.drivable.push_back(circle_polygon({d0 + radius, 0}, radius + w * 0.5, 40));
      out.lanes.push_back(arc_polyline({d0 + radius, 0}, radius, 0, 2 * M_PI, 40));
      out.lanes.push_back({{-L, 0}, {d0, 0}});
      int exits = static_cast<int>(rng.uniform_int(1, 3));
      for (int i = 0; i < exits; ++i) {
        double a = rng.uniform(0.5, 2 * M_PI - 0.5);
        Vec2 c{d0 + radius, 0};
        Vec2 dir{std::cos(a), std::sin(a)};
        straight_band(c + dir * radius, c + dir * (radius + L * 0.5), w * 0.8);
      }
      break;
    }
    case RoadTopology::kMerging: {
      straight_band({-L, 0}, {L, 0}, w);
      double x0 = rng.uniform(8, 18);
      double off = rng.uniform(8, 14) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
      straight_band({-L, off}, {x0, 0}, w * 0.75);
      out.lanes.push_back({{-L, 0}, {L, 0}});
      out.lanes.push_back({{-L, off}, {x0, 0}});
      break;
    }
    case RoadTopology::kNone:
      break;
  }
  return out;
}

Vec2 nearest_lane_direction(const BEVScene& scene, const Vec2& p) {
  double best = std::numeric_limits<double>::infinity();
  Vec2 dir{1, 0};
  for (const auto& line : scene.lane_polylines) {
    for (size_t i = 0; i + 1 < line.size(); ++i) {
      double d = point_segment_distance(p, line[i], line[i + 1]);
      if (d < best) {
        best = d;
        dir = (line[i + 1] - line[i]).normalized();
      }
    }
  }
  return dir;
}

bool inside_any(const std::vector<Polygon>& polys, const Vec2& p) {
  for (const auto& poly : polys)
    if (point_in_polygon(p, poly)) return true;
  return false;
}

}  // namespace

BEVScene generate_scene(uint64_t seed, const WorldSpec& spec) {
  validate_world_spec(spec);
  Rng rng = substream(seed, "scene");

  BEVScene scene;
  scene.road_topology = spec.topologies[static_cast<size_t>(
      rng.uniform_int(0, static_cast<int64_t>(spec.topologies.size()) - 1))];
  scene.attrs.time = rng.pick(spec.times);
  scene.attrs.weather = rng.pick(spec.weathers);
  scene.attrs.surroundings = rng.pick(spec.surroundings);

  double w = rng.uniform(spec.road_width_min, spec.road_width_max);
  RoadLayout layout = build_layout(scene.road_topology, spec.bound_m, w, rng);
  scene.drivable_polygons = std::move(layout.drivable);
  scene.lane_polylines = std::move(layout.lanes);
  scene.crossing_polygons = std::move(layout.crossings);

  int count = static_cast<int>(rng.uniform_int(spec.object_count_min, spec.object_count_max));
  for (int i = 0; i < count; ++i) {
    Category cat = rng.pick(spec.categories);
    bool want_off_road = rng.bernoulli(spec.off_road_prob) || scene.drivable_polygons.empty();
    Vec2 pos;
    bool placed = false;
    for (int attempt = 0; attempt < 60; ++attempt) {
      double theta = rng.uniform(0, 2 * M_PI);
      double r = rng.uniform(spec.object_distance_min,
                             std::min(spec.object_distance_max, spec.bound_m * 0.9));
      Vec2 cand{r * std::cos(theta), r * std::sin(theta)};
      bool on_road = inside_any(scene.drivable_polygons, cand);
      if (on_road != want_off_road) {
        pos = cand;
        placed = true;
        break;
      }
      pos = cand;  // fallback: last candidate
    }
    (void)placed;

    Vec3 base = default_category_size(cat);
    double jitter = rng.uniform(0.9, 1.1);
    OrientedBox3D box;
    box.category = cat;
    box.size = {base.x * jitter, base.y * jitter, base.z * rng.uniform(0.92, 1.08)};
    box.center = {pos.x, pos.y, box.size.z * 0.5};
    bool on_road = inside_any(scene.drivable_polygons, pos);
    if (on_road && !scene.lane_polylines.empty()) {
      Vec2 dir = nearest_lane_direction(scene, pos);
      box.yaw = normalize_yaw(std::atan2(dir.y, dir.x) + rng.normal() * 0.08);
    } else {
      box.yaw = normalize_yaw(rng.uniform(-M_PI, M_PI));
    }
    scene.objects.push_back(box);
  }
  return scene;
}

void validate_scene(const BEVScene& scene, const WorldSpec& spec) {
  auto check_polys = [](const std::vector<Polygon>& polys, const char* kind) {
    for (size_t i = 0; i < polys.size(); ++i) {
      if (polys[i].size() < 3)
        throw ValidationError(std::string(kind) + " polygon " + std::to_string(i) +
                              " has fewer than 3 vertices");
      if (!is_simple_polygon(polys[i]))
        throw ValidationError(std::string(kind) + " polygon " + std::to_string(i) +
                              " is not simple");
    }
  };
  check_polys(scene.drivable_polygons, "drivable");
  check_polys(scene.crossing_polygons, "crossing");
  for (size_t i = 0; i < scene.objects.size(); ++i) {
    const auto& b = scene.objects[i];
    if (b.size.x <= 0 || b.size.y <= 0 || b.size.z <= 0)
      throw ValidationError("object " + std::to_string(i) + " has non-positive size");
    if (std::abs(b.center.x) > spec.bound_m || std::abs(b.center.y) > spec.bound_m)
      throw ValidationError("object " + std::to_string(i) + " center outside world bound");
    if (b.yaw < -M_PI || b.yaw >= M_PI)
      throw ValidationError("object " + std::to_string(i) + " yaw outside [-pi, pi)");
  }
}

namespace {

// Deterministic retag tables for road add/remove edits.
RoadTopology retag_after_add(RoadTopology t) {
  switch (t) {
    case RoadTopology::kStraight: return RoadTopology::kTJunction;
    case RoadTopology::kTJunction: return RoadTopology::kCrossJunction;
    case RoadTopology::kYJunction: return RoadTopology::kCrossJunction;
    case RoadTopology::kSplit: return RoadTopology::kCrossJunction;
    case RoadTopology::kMerging: return RoadTopology::kCrossJunction;
    case RoadTopology::kLeftTurn: return RoadTopology::kTJunction;
    case RoadTopology::kRightTurn: return RoadTopology::kTJunction;
    case RoadTopology::kNone: return RoadTopology::kStraight;
    default: return t;
  }
}

RoadTopology retag_after_remove(RoadTopology t, bool any_road_left) {
  if (!any_road_left) return RoadTopology::kNone;
  switch (t) {
    case RoadTopology::kCrossJunction: return RoadTopology::kTJunction;
    case RoadTopology::kTJunction: return RoadTopology::kStraight;
    case RoadTopology::kYJunction: return RoadTopology::kStraight;
    case RoadTopology::kSplit: return RoadTopology::kStraight;
    case RoadTopology::kMerging: return RoadTopology::kStraight;
    default: return t;
  }
}

bool polyline_mostly_inside(const Polyline& line, const Polygon& poly) {
  if (line.empty()) return false;
  int inside = 0;
  for (const auto& p : line)
    if (point_in_polygon(p, poly)) ++inside;
  return inside * 2 > static_cast<int>(line.size());
}

Vec2 polygon_centroid(const Polygon& poly) {
  Vec2 c{0, 0};
  for (const auto& v : poly) c = c + v;
  return c * (1.0 / static_cast<double>(poly.size()));
}

}  // namespace

BEVScene edit_scene(const BEVScene& scene, const EditOp& edit, double bound_m) {
  BEVScene out = scene;
  switch (edit.kind) {
    case EditKind::kAddRoadBranch: {
      if (edit.width_m <= 0 || edit.length_m <= 0)
        throw GeometryError("road branch width/length must be positive");
      if (std::abs(edit.anchor.x) > bound_m || std::abs(edit.anchor.y) > bound_m)
        throw GeometryError("road branch anchor outside world bound");
      bool anchored = false;
      for (const auto& poly : scene.drivable_polygons) {
        if (point_in_polygon(edit.anchor, poly)) {
          anchored = true;
          break;
        }
      }
      if (!anchored && !scene.drivable_polygons.empty())
        throw GeometryError("road branch anchor not on drivable area");
      Vec2 dir{std::cos(edit.angle_rad), std::sin(edit.angle_rad)};
      Polygon band = segment_band(edit.anchor, edit.anchor + dir * edit.length_m, edit.width_m);
      if (!is_simple_polygon(band)) throw GeometryError("road branch polygon is degenerate");
      out.drivable_polygons.push_back(band);
      out.lane_polylines.push_back({edit.anchor, edit.anchor + dir * edit.length_m});
      out.road_topology = retag_after_add(scene.road_topology);
      break;
    }
    case EditKind::kRemoveRoadRegion: {
      if (edit.index < 0 || edit.index >= static_cast<int>(scene.drivable_polygons.size()))
        throw NotFoundError("drivable polygon index " + std::to_string(edit.index) +
                            " does not exist");
      Polygon removed = scene.drivable_polygons[edit.index];
      out.drivable_polygons.erase(out.drivable_polygons.begin() + edit.index);
      std::erase_if(out.lane_polylines,
                    [&](const Polyline& l) { return polyline_mostly_inside(l, removed); });
      std::erase_if(out.crossing_polygons, [&](const Polygon& c) {
        return point_in_polygon(polygon_centroid(c), removed);
      });
      out.road_topology =
          retag_after_remove(scene.road_topology, !out.drivable_polygons.empty());
      break;
    }
    case EditKind::kAddBox: {
      const auto& b = edit.box;
      if (b.size.x <= 0 || b.size.y <= 0 || b.size.z <= 0)
        throw GeometryError("box size must be positive");
      if (std::abs(b.center.x) > bound_m || std::abs(b.center.y) > bound_m)
        throw GeometryError("box center outside world bound");
      out.objects.push_back(b);
      out.objects.back().yaw = normalize_yaw(b.yaw);
      break;
    }
    case EditKind::kRemoveBox: {
      if (edit.index < 0 || edit.index >= static_cast<int>(scene.objects.size()))
        throw NotFoundError("object index " + std::to_string(edit.index) + " does not exist");
      out.objects.erase(out.objects.begin() + edit.index);
      break;
    }
    case EditKind::kMoveBox: {
      if (edit.index < 0 || edit.index >= static_cast<int>(scene.objects.size()))
        throw NotFoundError("object index " + std::to_string(edit.index) + " does not exist");
      auto& b = out.objects[edit.index];
      b.center.x += edit.delta.x;
      b.center.y += edit.delta.y;
      if (std::abs(b.center.x) > bound_m || std::abs(b.center.y) > bound_m)
        throw GeometryError("moved box center outside world bound");
      if (edit.new_yaw) b.yaw = normalize_yaw(*edit.new_yaw);
      break;
    }
  }
  return out;
}

std::optional<EditOp> propose_add_road_branch(const BEVScene& scene, Rng& rng, double bound_m) {
  if (scene.drivable_polygons.empty()) return std::nullopt;
  for (int attempt = 0; attempt < 40; ++attempt) {
    const auto& poly = scene.drivable_polygons[static_cast<size_t>(
        rng.uniform_int(0, static_cast<int64_t>(scene.drivable_polygons.size()) - 1))];
    size_t e = static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(poly.size()) - 1));
    Vec2 a = poly[e], b = poly[(e + 1) % poly.size()];
    double t = rng.uniform(0.25, 0.75);
    Vec2 edge_pt = a + (b - a) * t;
    Vec2 edge_dir = (b - a).normalized();
    Vec2 normal = edge_dir.perp();
    // Pick the outward side of the edge.
    if (point_in_polygon(edge_pt + normal * 0.5, poly)) normal = normal * -1.0;
    Vec2 anchor = edge_pt - normal * 0.8;  // slightly inside so the anchor test passes
    if (!point_in_polygon(anchor, poly)) continue;
    double length = rng.uniform(10, 18);
    double width = rng.uniform(4.5, 7.0);
    Vec2 tip = anchor + normal * length;
    if (std::abs(tip.x) > bound_m || std::abs(tip.y) > bound_m) continue;
    // Require the branch to mostly add new area.
    int outside = 0;
    const int kSamples = 12;
    for (int i = 1; i <= kSamples; ++i) {
      Vec2 p = anchor + normal * (length * i / (kSamples + 1.0));
      bool in = false;
      for (const auto& q : scene.drivable_polygons)
        if (point_in_polygon(p, q)) {
          in = true;
          break;
        }
      if (!in) ++outside;
    }
    if (outside < kSamples / 2) continue;
    EditOp op;
    op.kind = EditKind::kAddRoadBranch;
    op.anchor = anchor;
    op.angle_rad = std::atan2(normal.y, normal.x);
    op.width_m = width;
    op.length_m = length;
    return op;
  }
  return std::nullopt;
}

// -- Serialization ------------------------------------------------------------

namespace {

nlohmann::json poly_to_json(const Polygon& poly) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& v : poly) j.push_back({v.x, v.y});
  return j;
}

Polygon poly_from_json(const nlohmann::json& j) {
  Polygon poly;
  for (const auto& v : j) poly.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
  return poly;
}

}  // namespace

nlohmann::json scene_to_json(const BEVScene& scene) {
  nlohmann::json j;
  j["drivable_polygons"] = nlohmann::json::array();
  for (const auto& p : scene.drivable_polygons) j["drivable_polygons"].push_back(poly_to_json(p));
  j["lane_polylines"] = nlohmann::json::array();
  for (const auto& p : scene.lane_polylines) j["lane_polylines"].push_back(poly_to_json(p));
  j["crossing_polygons"] = nlohmann::json::array();
  for (const auto& p : scene.crossing_polygons) j["crossing_polygons"].push_back(poly_to_json(p));
  j["objects"] = nlohmann::json::array();
  for (const auto& b : scene.objects) {
    j["objects"].push_back({{"center", {b.center.x, b.center.y, b.center.z}},
                            {"size", {b.size.x, b.size.y, b.size.z}},
                            {"yaw", b.yaw},
                            {"category", to_string(b.category)}});
  }
  j["attrs"] = {{"time", to_string(scene.attrs.time)},
                {"weather", to_string(scene.attrs.weather)},
                {"surroundings", to_string(scene.attrs.surroundings)}};
  j["road_topology"] = to_string(scene.road_topology);
  return j;
}

BEVScene scene_from_json(const nlohmann::json& j) {
  BEVScene scene;
  for (const auto& p : j.at("drivable_polygons")) scene.drivable_polygons.push_back(poly_from_json(p));
  for (const auto& p : j.at("lane_polylines")) scene.lane_polylines.push_back(poly_from_json(p));
  for (const auto& p : j.at("crossing_polygons")) scene.crossing_polygons.push_back(poly_from_json(p));
  for (const auto& o : j.at("objects")) {
    OrientedBox3D b;
    b.center = {o.at("center").at(0).get<double>(), o.at("center").at(1).get<double>(),
                o.at("center").at(2).get<double>()};
    b.size = {o.at("size").at(0).get<double>(), o.at("size").at(1).get<double>(),
              o.at("size").at(2).get<double>()};
    b.yaw = o.at("yaw").get<double>();
    b.category = category_from_string(o.at("category").get<std::string>());
    scene.objects.push_back(b);
  }
  scene.attrs.time = time_from_string(j.at("attrs").at("time").get<std::string>());
  scene.attrs.weather = weather_from_string(j.at("attrs").at("weather").get<std::string>());
  scene.attrs.surroundings =
      surroundings_from_string(j.at("attrs").at("surroundings").get<std::string>());
  scene.road_topology = topology_from_string(j.at("road_topology").get<std::string>());
  return scene;
}

nlohmann::json edit_to_json(const EditOp& edit) {
  nlohmann::json j;
  switch (edit.kind) {
    case EditKind::kAddRoadBranch:
      j["op"] = "add_road_branch";
      j["anchor"] = {edit.anchor.x, edit.anchor.y};
      j["angle_rad"] = edit.angle_rad;
      j["width_m"] = edit.width_m;
      j["length_m"] = edit.length_m;
      break;
    case EditKind::kRemoveRoadRegion:
      j["op"] = "remove_road_region";
      j["index"] = edit.index;
      break;
    case EditKind::kAddBox:
      j["op"] = "add_box";
      j["category"] = to_string(edit.box.category);
      j["center"] = {edit.box.center.x, edit.box.center.y, edit.box.center.z};
      j["size"] = {edit.box.size.x, edit.box.size.y, edit.box.size.z};
      j["yaw"] = edit.box.yaw;
      break;
    case EditKind::kRemoveBox:
      j["op"] = "remove_box";
      j["index"] = edit.index;
      break;
    case EditKind::kMoveBox:
      j["op"] = "move_box";
      j["index"] = edit.index;
      j["delta"] = {edit.delta.x, edit.delta.y};
      if (edit.new_yaw) j["new_yaw"] = *edit.new_yaw;
      break;
  }
  return j;
}

EditOp edit_from_json(const nlohmann::json& j) {
  EditOp op;
  std::string kind = j.at("op").get<std::string>();
  if (kind == "add_road_branch") {
    op.kind = EditKind::kAddRoadBranch;
    op.anchor = {j.at("anchor").at(0).get<double>(), j.at("anchor").at(1).get<double>()};
    op.angle_rad = j.at("angle_rad").get<double>();
    op.width_m = j.at("width_m").get<double>();
    op.length_m = j.at("length_m").get<double>();
  } else if (kind == "remove_road_region") {
    op.kind = EditKind::kRemoveRoadRegion;
    op.index = j.at("index").get<int>();
  } else if (kind == "add_box") {
    op.kind = EditKind::kAddBox;
    op.box.category = category_from_string(j.at("category").get<std::string>());
    op.box.center = {j.at("center").at(0).get<double>(), j.at("center").at(1).get<double>(),
                     j.at("center").at(2).get<double>()};
    op.box.size = {j.at("size").at(0).get<double>(), j.at("size").at(1).get<double>(),
                   j.at("size").at(2).get<double>()};
    op.box.yaw = j.at("yaw").get<double>();
  } else if (kind == "remove_box") {
    op.kind = EditKind::kRemoveBox;
    op.index = j.at("index").get<int>();
  } else if (kind == "move_box") {
    op.kind = EditKind::kMoveBox;
    op.index = j.at("index").get<int>();
    op.delta = {j.at("delta").at(0).get<double>(), j.at("delta").at(1).get<double>()};
    if (j.contains("new_yaw")) op.new_yaw = j.at("new_yaw").get<double>();
  } else {
    throw ValidationError("unknown edit op: '" + kind + "'");
  }
  return op;
}

}  // namespace drivegen
