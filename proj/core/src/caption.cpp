// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#include "drivegen/caption.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "drivegen/errors.hpp"

namespace drivegen {

namespace {

const char* kFieldTime = "time";
const char* kFieldWeather = "weather";
const char* kFieldRoadType = "road type";
const char* kFieldSurroundings = "surroundings";
const char* kFieldObjects = "static_and_dynamic_objects";
const char* kFieldSpatial = "spatial relationships";

std::string plural(Category c) {
  if (c == Category::kBus) return "buses";
  return to_string(c) + "s";
}

std::string join_fields(const SceneDescription& d, const std::string& objects,
                        const std::string& spatial) {
  std::string out = d.time + ", " + d.weather + ", " + d.road_type + ", " + d.surroundings;
  if (!objects.empty()) out += ", " + objects;
  if (!spatial.empty()) out += ", " + spatial;
  return out;
}

// Drops trailing tokenizer pieces until fits(text) is satisfied.
std::string trim_to_fit(const std::string& text,
                        const std::function<bool(const std::string&)>& fits) {
  auto pieces = Tokenizer::split(text);
  while (!pieces.empty()) {
    std::string joined = Tokenizer::join(pieces);
    if (fits(joined)) return joined;
    pieces.pop_back();
  }
  return "";
}

}  // namespace

const SceneDescription& CaptionSet::at(ViewName v) const {
  for (size_t i = 0; i < views.size(); ++i) {
    if (views[i] == v) return descriptions[i];
  }
  throw NotFoundError("caption set has no view " + to_string(v));
}

SerializedCaption serialize_caption(const SceneDescription& desc, const TokenCounter& counter) {
  SerializedCaption out;
  std::string objects = desc.objects;
  std::string spatial = desc.spatial_relationships;

  auto text = join_fields(desc, objects, spatial);
  if (counter.count(text) > kCaptionTokenBudget) {
    // Spatial relationships go first.
    spatial = trim_to_fit(spatial, [&](const std::string& s) {
      return counter.count(join_fields(desc, objects, s)) <= kCaptionTokenBudget;
    });
    text = join_fields(desc, objects, spatial);
  }
  if (counter.count(text) > kCaptionTokenBudget) {
    objects = trim_to_fit(objects, [&](const std::string& s) {
      return counter.count(join_fields(desc, s, spatial)) <= kCaptionTokenBudget;
    });
    text = join_fields(desc, objects, spatial);
  }
  if (counter.count(text) > kCaptionTokenBudget) {
    // Pathological (the four head fields alone exceed the budget): trim the
    // whole serialization from the tail.
    text = trim_to_fit(text, [&](const std::string& s) {
      return counter.count(s) <= kCaptionTokenBudget;
    });
  }
  out.text = text;
  out.token_count = counter.count(text);
  return out;
}

CaptionSet describe_scene(const BEVScene& scene, const CameraRig& rig,
                          const TokenCounter& counter, const CaptionParams& params,
                          const RenderParams& render_params) {
  RenderResult render = render_scene(scene, rig, render_params);

  CaptionSet set;
  for (size_t vi = 0; vi < rig.cameras.size(); ++vi) {
    const auto& cam = rig.cameras[vi];
    const auto& view = render.views[vi];

    SceneDescription d;
    d.time = to_string(scene.attrs.time);
    d.weather = to_string(scene.attrs.weather);
    d.surroundings = to_string(scene.attrs.surroundings);

    bool road_visible = false;
    for (uint8_t l : view.labels.pixels()) {
      if (l == static_cast<uint8_t>(SemanticClass::kRoad)) {
        road_visible = true;
        break;
      }
    }
    d.road_type = road_visible ? to_string(scene.road_topology) : "no road";

    // Objects: categories above the area threshold, largest first.
    struct CatArea {
      int cat;
      int64_t area;
    };
    std::vector<CatArea> cats;
    for (int c = 0; c < kNumCategories; ++c) {
      if (view.category_pixels[c] >= params.min_visible_area_px)
        cats.push_back({c, view.category_pixels[c]});
    }
    std::stable_sort(cats.begin(), cats.end(),
                     [](const CatArea& a, const CatArea& b) { return a.area > b.area; });
    std::string objects;
    for (const auto& ca : cats) {
      Category cat = static_cast<Category>(ca.cat);
      int instances = 0;
      for (size_t oi = 0; oi < scene.objects.size(); ++oi) {
        if (scene.objects[oi].category == cat && view.object_pixels[oi] > 0) ++instances;
      }
      if (!objects.empty()) objects += ", ";
      objects += instances > 1 ? plural(cat) : to_string(cat);
    }
    d.objects = objects.empty() ? "none" : objects;

    // Spatial sentence from nearest clearly-visible objects.
    struct Near {
      size_t index;
      double dist;
    };
    std::vector<Near> nearest;
    for (size_t oi = 0; oi < scene.objects.size(); ++oi) {
      if (view.object_pixels[oi] >= params.min_visible_area_px) {
        const auto& c = scene.objects[oi].center;
        nearest.push_back({oi, std::sqrt(c.x * c.x + c.y * c.y)});
      }
    }
    std::stable_sort(nearest.begin(), nearest.end(),
                     [](const Near& a, const Near& b) { return a.dist < b.dist; });
    if (nearest.size() > static_cast<size_t>(params.max_spatial_objects))
      nearest.resize(params.max_spatial_objects);

    // View-relative bearing: project onto the camera's right axis.
    Mat3 rt = cam.rotation.transpose();
    Vec3 right = rt * Vec3{1, 0, 0};
    Vec3 forward = rt * Vec3{0, 0, 1};
    std::string spatial;
    for (const auto& nb : nearest) {
      const auto& obj = scene.objects[nb.index];
      Vec3 dir{obj.center.x, obj.center.y, 0};
      double fwd = dir.x * forward.x + dir.y * forward.y;
      double lat = dir.x * right.x + dir.y * right.y;
      const char* bearing = "in the center";
      if (std::abs(lat) > 0.27 * std::max(1.0, fwd)) {  // ~15 degrees
        bearing = lat < 0 ? "on the left" : "on the right";
      }
      long dist = std::lround(nb.dist);
      if (!spatial.empty()) spatial += "; ";
      spatial += "a " + to_string(obj.category) + " is about " + std::to_string(dist) +
                 " meters away " + bearing;
    }
    if (spatial.empty()) {
      spatial = road_visible ? "the road is clear in this view" : "open area with no traffic";
    }
    d.spatial_relationships = spatial;

    set.views.push_back(cam.name);
    set.descriptions.push_back(std::move(d));
  }

  for (const auto& d : set.descriptions) set.serialized.push_back(serialize_caption(d, counter));
  return set;
}

namespace {

const std::vector<std::string>& road_type_vocab() {
  static const std::vector<std::string> vocab = [] {
    std::vector<std::string> v;
    for (int i = 0; i < 10; ++i) v.push_back(to_string(static_cast<RoadTopology>(i)));
    return v;
  }();
  return vocab;
}

std::string require_string_field(const nlohmann::json& view_obj, const std::string& view_name,
                                 const char* field) {
  if (!view_obj.contains(field))
    throw ValidationError("missing field at " + view_name + "." + field);
  const auto& v = view_obj.at(field);
  if (!v.is_string())
    throw ValidationError("non-string value at " + view_name + "." + field);
  std::string s = v.get<std::string>();
  if (s.empty()) throw ValidationError("empty value at " + view_name + "." + field);
  return s;
}

}  // namespace

CaptionSet validate_caption(const std::string& json_text) {
  return validate_caption(json_text,
                          {ViewName::kFrontLeft, ViewName::kFront, ViewName::kFrontRight,
                           ViewName::kBackRight, ViewName::kBack, ViewName::kBackLeft});
}

CaptionSet validate_caption(const std::string& json_text,
                            const std::vector<ViewName>& required_views) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("caption JSON parse error: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("caption root is not a JSON object");

  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (ViewName v : required_views)
      if (to_string(v) == it.key()) known = true;
    if (!known) throw ValidationError("unexpected key '" + it.key() + "' at root");
  }

  CaptionSet set;
  for (ViewName v : required_views) {
    const std::string& name = to_string(v);
    if (!j.contains(name)) throw ValidationError("missing view " + name);
    const auto& vo = j.at(name);
    if (!vo.is_object()) throw ValidationError(name + " is not an object");
    static const char* kFields[6] = {kFieldTime,         kFieldWeather, kFieldRoadType,
                                     kFieldSurroundings, kFieldObjects, kFieldSpatial};
    for (auto it = vo.begin(); it != vo.end(); ++it) {
      bool known = false;
      for (const char* f : kFields)
        if (it.key() == f) known = true;
      if (!known) throw ValidationError("unexpected key '" + it.key() + "' at " + name);
    }
    SceneDescription d;
    d.time = require_string_field(vo, name, kFieldTime);
    d.weather = require_string_field(vo, name, kFieldWeather);
    d.road_type = require_string_field(vo, name, kFieldRoadType);
    d.surroundings = require_string_field(vo, name, kFieldSurroundings);
    d.objects = require_string_field(vo, name, kFieldObjects);
    d.spatial_relationships = require_string_field(vo, name, kFieldSpatial);
    const auto& vocab = road_type_vocab();
    if (std::find(vocab.begin(), vocab.end(), d.road_type) == vocab.end())
      throw ValidationError("road type '" + d.road_type + "' not in vocabulary at " + name +
                            "." + kFieldRoadType);
    set.views.push_back(v);
    set.descriptions.push_back(std::move(d));
  }
  return set;
}

nlohmann::json caption_set_to_json(const CaptionSet& set) {
  nlohmann::json j = nlohmann::json::object();
  for (size_t i = 0; i < set.views.size(); ++i) {
    const auto& d = set.descriptions[i];
    j[to_string(set.views[i])] = {
        {kFieldTime, d.time},
        {kFieldWeather, d.weather},
        {kFieldRoadType, d.road_type},
        {kFieldSurroundings, d.surroundings},
        {kFieldObjects, d.objects},
        {kFieldSpatial, d.spatial_relationships},
    };
  }
  return j;
}

}  // namespace drivegen
