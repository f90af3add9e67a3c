// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#include "drivegen/evaluation.hpp"

#include <torch/torch.h>

#include <cmath>

#include "drivegen/codec.hpp"
#include "drivegen/errors.hpp"
#include "drivegen/render.hpp"
#include "drivegen/rng.hpp"

namespace drivegen {

namespace {

struct PaletteEntry {
  Rgb color;
  SemanticClass cls;
};

const std::vector<PaletteEntry>& class_palette() {
  static const std::vector<PaletteEntry> entries = [] {
    std::vector<PaletteEntry> out;
    out.push_back({palette::kSky, SemanticClass::kBackground});
    out.push_back({palette::kTerrain, SemanticClass::kBackground});
    out.push_back({palette::kDrivable, SemanticClass::kRoad});
    out.push_back({palette::kLane, SemanticClass::kRoad});
    out.push_back({palette::kCrossing, SemanticClass::kRoad});
    for (int c = 0; c < kNumCategories; ++c) {
      out.push_back({palette::kCategory[c], category_class(static_cast<Category>(c))});
    }
    return out;
  }();
  return entries;
}

inline double sq(double v) { return v * v; }

}  // namespace

GrayImage classify_pixels(const Image& generated, const EvalConfig& eval_config,
                          const std::optional<SceneAttrs>& attrs) {
  const auto& entries = class_palette();
  TintFactors tint{1.0, 1.0};
  if (attrs) tint = tint_factors(*attrs);
  GrayImage labels(generated.height(), generated.width(),
                   static_cast<uint8_t>(SemanticClass::kBackground));
  const double delta2 = sq(eval_config.palette_delta);
  for (int y = 0; y < generated.height(); ++y) {
    for (int x = 0; x < generated.width(); ++x) {
      Rgb px = generated.at(y, x);
      if (attrs) px = invert_tint(px, tint);
      double best = 1e9;
      SemanticClass best_cls = SemanticClass::kBackground;
      for (const auto& e : entries) {
        double d = sq((px.r - e.color.r) / 255.0) + sq((px.g - e.color.g) / 255.0) +
                   sq((px.b - e.color.b) / 255.0);
        if (d < best) {
          best = d;
          best_cls = e.cls;
        }
      }
      labels.at(y, x) = static_cast<uint8_t>(best <= delta2 ? best_cls
                                                            : SemanticClass::kBackground);
    }
  }
  return labels;
}

namespace {

double iou_of_class(const GrayImage& a, const GrayImage& b, SemanticClass cls) {
  long inter = 0, uni = 0;
  const uint8_t target = static_cast<uint8_t>(cls);
  for (size_t i = 0; i < a.pixels().size(); ++i) {
    bool in_a = a.pixels()[i] == target;
    bool in_b = b.pixels()[i] == target;
    inter += in_a && in_b;
    uni += in_a || in_b;
  }
  if (uni == 0) return 1.0;  // both empty
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace

double layout_iou(const std::vector<std::vector<Image>>& generated,
                  const std::vector<BEVScene>& scenes, const CameraRig& rig, SemanticClass cls,
                  const EvalConfig& eval_config, const RenderParams& render_params) {
  if (generated.empty() || generated.size() != scenes.size())
    throw UsageError("layout_iou needs one generated view set per scene");
  double sum = 0;
  long count = 0;
  for (size_t s = 0; s < scenes.size(); ++s) {
    auto oracle = semantic_oracle(scenes[s], rig, render_params);
    if (generated[s].size() != oracle.size())
      throw UsageError("generated view count mismatch at scene " + std::to_string(s));
    for (size_t v = 0; v < oracle.size(); ++v) {
      auto labels = classify_pixels(generated[s][v], eval_config, scenes[s].attrs);
      sum += iou_of_class(labels, oracle[v], cls);
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

double freq_fidelity(const std::vector<Image>& generated, const std::vector<Image>& targets,
                     const FrequencyFilterConfig& cfg) {
  if (generated.empty() || generated.size() != targets.size())
    throw UsageError("freq_fidelity needs matching non-empty sets");
  double sum = 0;
  for (size_t i = 0; i < generated.size(); ++i) {
    auto a = image_to_tensor(generated[i], torch::kFloat64).add(1.0).div(2.0);
    auto b = image_to_tensor(targets[i], torch::kFloat64).add(1.0).div(2.0);
    sum += freq_loss(a, b, cfg).item<double>();
  }
  return sum / static_cast<double>(generated.size());
}

namespace {

// Seeded random projection of area-downsampled pixels.
torch::Tensor proxy_features(const std::vector<Image>& set, const EvalConfig& cfg) {
  constexpr int kH = 16, kW = 32;
  const int64_t in_dim = 3 * kH * kW;
  Rng rng = substream(cfg.proxy_seed, "proxy-projection");
  std::vector<double> proj(static_cast<size_t>(cfg.proxy_dim * in_dim));
  rng.fill_normal(proj.data(), proj.size());
  auto p = torch::tensor(proj, torch::kFloat64).view({cfg.proxy_dim, in_dim}) /
           std::sqrt(static_cast<double>(in_dim));

  std::vector<torch::Tensor> rows;
  rows.reserve(set.size());
  for (const auto& img : set) {
    auto t = image_to_tensor(img, torch::kFloat64).add(1.0).div(2.0).unsqueeze(0);
    auto small = torch::adaptive_avg_pool2d(t, {kH, kW}).flatten();
    rows.push_back(p.matmul(small));
  }
  return torch::stack(rows);  // [N, dim]
}

torch::Tensor matrix_sqrt_psd(const torch::Tensor& m) {
  auto [vals, vecs] = torch::linalg_eigh(m);
  auto clamped = vals.clamp_min(0.0).sqrt();
  return vecs.matmul(torch::diag(clamped)).matmul(vecs.t());
}

}  // namespace

double dist_proxy(const std::vector<Image>& set_a, const std::vector<Image>& set_b,
                  const EvalConfig& eval_config) {
  if (set_a.empty() || set_b.empty()) throw UsageError("dist_proxy needs non-empty sets");
  auto fa = proxy_features(set_a, eval_config);
  auto fb = proxy_features(set_b, eval_config);
  auto mu_a = fa.mean(0);
  auto mu_b = fb.mean(0);
  auto center_a = fa - mu_a.unsqueeze(0);
  auto center_b = fb - mu_b.unsqueeze(0);
  const double na = std::max<double>(1.0, static_cast<double>(fa.size(0)) - 1.0);
  const double nb = std::max<double>(1.0, static_cast<double>(fb.size(0)) - 1.0);
  auto reg = torch::eye(eval_config.proxy_dim, torch::kFloat64) * 1e-6;
  auto cov_a = center_a.t().matmul(center_a) / na + reg;
  auto cov_b = center_b.t().matmul(center_b) / nb + reg;

  auto diff = mu_a - mu_b;
  auto sqrt_b = matrix_sqrt_psd(cov_b);
  auto cross = matrix_sqrt_psd(sqrt_b.matmul(cov_a).matmul(sqrt_b));
  double value = diff.dot(diff).item<double>() + cov_a.trace().item<double>() +
                 cov_b.trace().item<double>() - 2.0 * cross.trace().item<double>();
  return std::max(0.0, value);
}

nlohmann::json EditProtocolReport::to_json() const {
  nlohmann::json j;
  j["mean_margin_road"] = mean_margin_road;
  j["mean_margin_vehicle"] = mean_margin_vehicle;
  j["success_rate"] = success_rate;
  auto arr = nlohmann::json::array();
  for (const auto& c : cases) {
    arr.push_back({{"edit", c.edit_kind},
                   {"margin_road", c.margin_road},
                   {"margin_vehicle", c.margin_vehicle},
                   {"success", c.success}});
  }
  j["cases"] = arr;
  return j;
}

EditProtocolReport map_edit_protocol(const SceneGenerator& generator,
                                     const std::vector<BEVScene>& scenes,
                                     const std::vector<EditOp>& edits, const CameraRig& rig,
                                     const ExperimentConfig& config, uint64_t base_seed) {
  if (scenes.empty() || scenes.size() != edits.size())
    throw UsageError("map_edit_protocol needs one edit per scene");
  EditProtocolReport report;
  double sum_road = 0, sum_vehicle = 0;
  long successes = 0;
  for (size_t i = 0; i < scenes.size(); ++i) {
    const BEVScene& original = scenes[i];
    BEVScene edited = edit_scene(original, edits[i], config.world.bound_m);
    const uint64_t sample_seed = mix_seed(base_seed, "edit-protocol", i);

    auto gen_edited = generator(edited, sample_seed);
    auto oracle_edited = semantic_oracle(edited, rig, config.render);
    auto oracle_orig = semantic_oracle(original, rig, config.render);

    double iou_edit_road = 0, iou_orig_road = 0, iou_edit_veh = 0, iou_orig_veh = 0;
    for (size_t v = 0; v < oracle_edited.size(); ++v) {
      auto labels = classify_pixels(gen_edited[v], config.eval, edited.attrs);
      iou_edit_road += iou_of_class(labels, oracle_edited[v], SemanticClass::kRoad);
      iou_orig_road += iou_of_class(labels, oracle_orig[v], SemanticClass::kRoad);
      iou_edit_veh += iou_of_class(labels, oracle_edited[v], SemanticClass::kVehicle);
      iou_orig_veh += iou_of_class(labels, oracle_orig[v], SemanticClass::kVehicle);
    }
    const double nv = static_cast<double>(oracle_edited.size());
    EditCaseReport c;
    switch (edits[i].kind) {
      case EditKind::kAddRoadBranch: c.edit_kind = "add_road_branch"; break;
      case EditKind::kRemoveRoadRegion: c.edit_kind = "remove_road_region"; break;
      case EditKind::kAddBox: c.edit_kind = "add_box"; break;
      case EditKind::kRemoveBox: c.edit_kind = "remove_box"; break;
      case EditKind::kMoveBox: c.edit_kind = "move_box"; break;
    }
    c.margin_road = (iou_edit_road - iou_orig_road) / nv;
    c.margin_vehicle = (iou_edit_veh - iou_orig_veh) / nv;
    c.success = c.margin_road > 0;
    sum_road += c.margin_road;
    sum_vehicle += c.margin_vehicle;
    successes += c.success ? 1 : 0;
    report.cases.push_back(std::move(c));
  }
  report.mean_margin_road = sum_road / static_cast<double>(scenes.size());
  report.mean_margin_vehicle = sum_vehicle / static_cast<double>(scenes.size());
  report.success_rate = static_cast<double>(successes) / static_cast<double>(scenes.size());
  return report;
}

std::optional<EditOp> propose_visible_road_branch(const BEVScene& scene, Rng& rng,
                                                  const CameraRig& rig,
                                                  const ExperimentConfig& config,
                                                  int min_changed_px, int attempts) {
  auto orig_labels = semantic_oracle(scene, rig, config.render);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    auto op = propose_add_road_branch(scene, rng, config.world.bound_m);
    if (!op) return std::nullopt;
    BEVScene edited;
    try {
      edited = edit_scene(scene, *op, config.world.bound_m);
    } catch (const GeometryError&) {
      continue;
    }
    auto edited_labels = semantic_oracle(edited, rig, config.render);
    long changed = 0;
    for (size_t v = 0; v < orig_labels.size(); ++v) {
      for (size_t i = 0; i < orig_labels[v].pixels().size(); ++i) {
        changed += orig_labels[v].pixels()[i] != edited_labels[v].pixels()[i];
      }
    }
    if (changed >= min_changed_px) return op;
  }
  return std::nullopt;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json j;
  j["road_iou"] = road_iou;
  j["vehicle_iou"] = vehicle_iou;
  j["freq_fidelity"] = freq_fidelity;
  j["dist_proxy"] = dist_proxy;
  j["config_hash"] = config_hash;
  j["per_scene"] = per_scene;
  if (edits) j["edit_protocol"] = edits->to_json();
  return j;
}

Image contact_sheet(const std::vector<std::vector<Image>>& rows) {
  if (rows.empty() || rows[0].empty()) throw UsageError("contact sheet needs images");
  const int cell_h = rows[0][0].height();
  const int cell_w = rows[0][0].width();
  const int pad = 2;
  size_t cols = 0;
  for (const auto& r : rows) cols = std::max(cols, r.size());
  Image sheet(static_cast<int>(rows.size()) * (cell_h + pad) - pad,
              static_cast<int>(cols) * (cell_w + pad) - pad, {24, 24, 24});
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c = 0; c < rows[r].size(); ++c) {
      const Image& img = rows[r][c];
      for (int y = 0; y < img.height() && y < cell_h; ++y) {
        for (int x = 0; x < img.width() && x < cell_w; ++x) {
          sheet.at(static_cast<int>(r) * (cell_h + pad) + y,
                   static_cast<int>(c) * (cell_w + pad) + x) = img.at(y, x);
        }
      }
    }
  }
  return sheet;
}

}  // namespace drivegen
