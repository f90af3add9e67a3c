// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "drivegen/geometry.hpp"
#include "drivegen/rng.hpp"

namespace drivegen {

// The ten object categories.
enum class Category {
  kCar,
  kBus,
  kTruck,
  kTrailer,
  kMotorcycle,
  kBicycle,
  kConstructionVehicle,
  kPedestrian,
  kBarrier,
  kTrafficCone,
};
inline constexpr int kNumCategories = 10;

enum class TimeOfDay { kDaytime, kNight, kEvening, kDawn, kDusk };
enum class Weather {
  kClear,
  kSunny,
  kOvercast,
  kCloudy,
  kFoggy,
  kRainy,
  kDrizzle,
  kSnowy,
  kHazy,
  kStormy,
};
enum class Surroundings {
  kUrbanIntersection,
  kResidentialStreet,
  kMultiLaneHighway,
  kConstructionZone,
  kUrbanParkArea,
  kCommercialArea,
  kRuralArea,
};
enum class RoadTopology {
  kStraight,
  kSplit,
  kLeftTurn,
  kRightTurn,
  kCrossJunction,
  kTJunction,
  kYJunction,
  kRoundabout,
  kMerging,
  kNone,
};

const std::string& to_string(Category c);
const std::string& to_string(TimeOfDay t);
const std::string& to_string(Weather w);
const std::string& to_string(Surroundings s);
// Road-type caption vocabulary ("straight road", "cross-junction", ..., "no road").
const std::string& to_string(RoadTopology t);

Category category_from_string(const std::string& s);
TimeOfDay time_from_string(const std::string& s);
Weather weather_from_string(const std::string& s);
Surroundings surroundings_from_string(const std::string& s);
RoadTopology topology_from_string(const std::string& s);

struct SceneAttrs {
  TimeOfDay time = TimeOfDay::kDaytime;
  Weather weather = Weather::kClear;
  Surroundings surroundings = Surroundings::kUrbanIntersection;
  bool operator==(const SceneAttrs&) const = default;
};

struct OrientedBox3D {
  Vec3 center;                  // meters, ego frame
  Vec3 size;                    // length (x), width (y), height (z)
  double yaw = 0.0;             // radians in [-pi, pi)
  Category category = Category::kCar;

  // 8 corners in ego frame; bottom face first, CCW from +x+y.
  std::array<Vec3, 8> corners() const;
  // Ground-plane footprint (4 corners).
  std::array<Vec2, 4> footprint() const;
};

struct BEVScene {
  std::vector<Polygon> drivable_polygons;
  std::vector<Polyline> lane_polylines;
  std::vector<Polygon> crossing_polygons;
  std::vector<OrientedBox3D> objects;
  SceneAttrs attrs;
  RoadTopology road_topology = RoadTopology::kStraight;
};

// Generation config for the procedural world.
struct WorldSpec {
  double bound_m = 50.0;  // world square is [-bound, bound]^2
  int object_count_min = 2;
  int object_count_max = 8;
  double off_road_prob = 0.15;
  double object_distance_min = 4.0;
  double object_distance_max = 28.0;
  double road_width_min = 7.0;
  double road_width_max = 12.0;
  double lane_band_width = 0.45;  // lane-marking band for rasterization, meters
  std::vector<RoadTopology> topologies = {
      RoadTopology::kStraight,      RoadTopology::kSplit,     RoadTopology::kLeftTurn,
      RoadTopology::kRightTurn,     RoadTopology::kCrossJunction, RoadTopology::kTJunction,
      RoadTopology::kYJunction,     RoadTopology::kRoundabout,    RoadTopology::kMerging,
  };
  std::vector<TimeOfDay> times = {TimeOfDay::kDaytime, TimeOfDay::kNight, TimeOfDay::kEvening,
                                  TimeOfDay::kDawn, TimeOfDay::kDusk};
  std::vector<Weather> weathers = {Weather::kClear,  Weather::kSunny,   Weather::kOvercast,
                                   Weather::kCloudy, Weather::kFoggy,   Weather::kRainy,
                                   Weather::kDrizzle, Weather::kSnowy,  Weather::kHazy,
                                   Weather::kStormy};
  std::vector<Surroundings> surroundings = {
      Surroundings::kUrbanIntersection, Surroundings::kResidentialStreet,
      Surroundings::kMultiLaneHighway,  Surroundings::kConstructionZone,
      Surroundings::kUrbanParkArea,     Surroundings::kCommercialArea,
      Surroundings::kRuralArea};
  std::vector<Category> categories = {
      Category::kCar,        Category::kBus,     Category::kTruck,
      Category::kTrailer,    Category::kMotorcycle, Category::kBicycle,
      Category::kConstructionVehicle, Category::kPedestrian, Category::kBarrier,
      Category::kTrafficCone};
};

// Throws ConfigError when bounds/counts/sets are invalid.
void validate_world_spec(const WorldSpec& spec);

// Deterministic procedural scene; identical (seed, spec) yield bit-identical
// scenes.
BEVScene generate_scene(uint64_t seed, const WorldSpec& spec);

// Checks all BEVScene invariants; throws ValidationError naming the first
// violation.
void validate_scene(const BEVScene& scene, const WorldSpec& spec);

// -- Scene edits ------------------------------------------------------------

enum class EditKind { kAddRoadBranch, kRemoveRoadRegion, kAddBox, kRemoveBox, kMoveBox };

struct EditOp {
  EditKind kind = EditKind::kAddBox;
  // add_road_branch
  Vec2 anchor;
  double angle_rad = 0.0;
  double width_m = 0.0;
  double length_m = 0.0;
  // remove_road_region / remove_box / move_box
  int index = -1;
  // add_box
  OrientedBox3D box;
  // move_box
  Vec2 delta;
  std::optional<double> new_yaw;
};

// Applies one edit, returning a new scene. Throws NotFoundError for missing
// element references and GeometryError for geometrically invalid parameters.
BEVScene edit_scene(const BEVScene& scene, const EditOp& edit, double bound_m);

// Proposes a road branch growing outward from a drivable boundary; used by
// the controllability protocol. Returns nullopt when the scene has no road.
std::optional<EditOp> propose_add_road_branch(const BEVScene& scene, Rng& rng, double bound_m);

// -- Serialization ----------------------------------------------------------

nlohmann::json scene_to_json(const BEVScene& scene);
BEVScene scene_from_json(const nlohmann::json& j);
nlohmann::json edit_to_json(const EditOp& edit);
EditOp edit_from_json(const nlohmann::json& j);

double normalize_yaw(double yaw);

// Default physical dimensions per category (length, width, height).
Vec3 default_category_size(Category c);

}  // namespace drivegen
