// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "drivegen/camera.hpp"
#include "drivegen/config.hpp"
#include "drivegen/image.hpp"
#include "drivegen/objectives.hpp"
#include "drivegen/palette.hpp"
#include "drivegen/scene.hpp"

namespace drivegen {

// Nearest-palette-class pixel labeling with a rejection distance (Euclidean
// on unit RGB) mapping to background. When the scene attrs are supplied, the
// deterministic global tint is inverted before matching (the tint has an
// exact inverse up to 8-bit rounding).
GrayImage classify_pixels(const Image& generated, const EvalConfig& eval_config,
                          const std::optional<SceneAttrs>& attrs = std::nullopt);

// Per-(scene, view) IoU of one class between classified generated pixels and
// the oracle labels, averaged over views and scenes. Degenerate convention:
// both regions empty -> 1, exactly one empty -> 0.
// `generated[s][v]` pairs with scenes[s] and rig camera v.
double layout_iou(const std::vector<std::vector<Image>>& generated,
                  const std::vector<BEVScene>& scenes, const CameraRig& rig,
                  SemanticClass cls, const EvalConfig& eval_config,
                  const RenderParams& render_params);

// Mean spectral structure distance between generated and reference sets
// (unit-RGB tensors, full resolution). Lower is better.
double freq_fidelity(const std::vector<Image>& generated, const std::vector<Image>& targets,
                     const FrequencyFilterConfig& cfg);

// Frechet distance between Gaussian fits of seeded random-projection
// features of the two image sets. Deterministic given (images, seed).
double dist_proxy(const std::vector<Image>& set_a, const std::vector<Image>& set_b,
                  const EvalConfig& eval_config);

// -- Map-edit controllability protocol ----------------------------------------

// Produces the generated views of one scene from a fixed latent seed.
using SceneGenerator =
    std::function<std::vector<Image>(const BEVScene& scene, uint64_t sample_seed)>;

struct EditCaseReport {
  std::string edit_kind;
  double margin_road = 0;     // IoU(gen_edited, oracle_edited) - IoU(gen_edited, oracle_orig)
  double margin_vehicle = 0;
  bool success = false;       // positive road margin
};

struct EditProtocolReport {
  std::vector<EditCaseReport> cases;
  double mean_margin_road = 0;
  double mean_margin_vehicle = 0;
  double success_rate = 0;

  nlohmann::json to_json() const;
};

// For each (scene, edit): sample with original and edited conditions using
// the SAME latent seed; margins isolate the condition change from sampling
// noise. Throws UsageError on empty or mismatched inputs.
EditProtocolReport map_edit_protocol(const SceneGenerator& generator,
                                     const std::vector<BEVScene>& scenes,
                                     const std::vector<EditOp>& edits, const CameraRig& rig,
                                     const ExperimentConfig& config, uint64_t base_seed);

// Road-branch proposal constrained to be observable under the given rig: the
// edit must change at least `min_changed_px` oracle label pixels, otherwise
// its protocol margin is structurally zero.
std::optional<EditOp> propose_visible_road_branch(const BEVScene& scene, Rng& rng,
                                                  const CameraRig& rig,
                                                  const ExperimentConfig& config,
                                                  int min_changed_px = 40, int attempts = 25);

// -- Aggregate report -----------------------------------------------------------

struct EvalReport {
  double road_iou = 0;
  double vehicle_iou = 0;
  double freq_fidelity = 0;
  double dist_proxy = 0;
  std::vector<nlohmann::json> per_scene;
  std::string config_hash;
  std::optional<EditProtocolReport> edits;

  nlohmann::json to_json() const;
};

// Contact-sheet grid (original | map cond | box cond | generated [| edited
// pair]) for one scene's views, for human inspection.
Image contact_sheet(const std::vector<std::vector<Image>>& rows);

}  // namespace drivegen
