// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "drivegen/camera.hpp"
#include "drivegen/render.hpp"
#include "drivegen/scene.hpp"
#include "drivegen/tokenizer.hpp"

namespace drivegen {

// Six-aspect per-view description. Field names in the JSON schema follow the
// captioning protocol exactly: "time", "weather", "road type", "surroundings",
// "static_and_dynamic_objects", "spatial relationships".
struct SceneDescription {
  std::string time;
  std::string weather;
  std::string road_type;
  std::string surroundings;
  std::string objects;
  std::string spatial_relationships;
};

struct SerializedCaption {
  std::string text;
  int token_count = 0;
};

struct CaptionSet {
  std::vector<ViewName> views;
  std::vector<SceneDescription> descriptions;
  std::vector<SerializedCaption> serialized;

  const SceneDescription& at(ViewName v) const;
};

inline constexpr int kCaptionTokenBudget = 77;

struct CaptionParams {
  int min_visible_area_px = 50;  // category area threshold for the objects field
  int max_spatial_objects = 2;
};

// Deterministic template captioner grounded in the render pass: attrs fields
// copied from ground truth, road type from topology + per-view visibility,
// objects ordered by projected area, spatial sentence from a fixed phrase
// grammar. Serializations are filled under the given counter.
CaptionSet describe_scene(const BEVScene& scene, const CameraRig& rig,
                          const TokenCounter& counter, const CaptionParams& params = {},
                          const RenderParams& render_params = {});

// Fixed field order (time, weather, road type, surroundings, objects,
// spatial relationships) joined with ", ". Over budget, the spatial field is
// truncated first, then objects tail-trimmed; remaining fields trim
// right-to-left only in the pathological case. Result is always <= 77 tokens.
SerializedCaption serialize_caption(const SceneDescription& desc, const TokenCounter& counter);

// Strict captioning-protocol validation: exactly the six view keys, exactly
// the six fields per view, string values, non-empty, road type from the
// closed vocabulary. Throws ParseError for malformed JSON and ValidationError
// (naming the offending path) for schema mismatches. `required_views` lets
// dataset validation check reduced rigs; the protocol default is all six.
CaptionSet validate_caption(const std::string& json_text);
CaptionSet validate_caption(const std::string& json_text,
                            const std::vector<ViewName>& required_views);

// Listing-style JSON for a caption set (view name -> six fields).
nlohmann::json caption_set_to_json(const CaptionSet& set);

}  // namespace drivegen
