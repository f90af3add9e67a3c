// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "drivegen/config.hpp"
#include "drivegen/errors.hpp"
#include "drivegen/evaluation.hpp"
#include "drivegen/render.hpp"
#include "drivegen/rng.hpp"

using namespace drivegen;

namespace {

WorldSpec small_world() {
  WorldSpec spec;
  spec.bound_m = 40;
  spec.object_count_min = 1;
  spec.object_count_max = 5;
  spec.object_distance_max = 26;
  return spec;
}

ExperimentConfig eval_experiment() {
  ExperimentConfig c;
  c.world = small_world();
  c.rig.views = 2;
  c.rig.image_h = 32;
  c.rig.image_w = 64;
  c.model.image_h = 32;
  c.model.image_w = 64;
  c.model.views = 2;
  c.model.channels = {16, 16, 24, 24};
  c.model.text_dim = 16;
  c.model.pool_dim = 8;
  c.model.heads = 4;
  return c;
}

}  // namespace

TEST_CASE("classify_pixels inverts oracle renders exactly") {
  WorldSpec spec = small_world();
  EvalConfig eval_config;
  CameraRig rig = make_rig(2, 32, 64);
  for (uint64_t seed = 0; seed < 8; ++seed) {
    BEVScene scene = generate_scene(seed, spec);
    auto result = render_scene(scene, rig, {});
    for (size_t v = 0; v < result.views.size(); ++v) {
      auto labels = classify_pixels(result.views[v].image, eval_config, scene.attrs);
      CHECK(labels == result.views[v].labels);
    }
  }
}

TEST_CASE("classify_pixels rejects colors far from every palette entry") {
  EvalConfig eval_config;
  Image gray(8, 8, {10, 200, 20});  // not near any palette color
  auto labels = classify_pixels(gray, eval_config);
  for (uint8_t l : labels.pixels()) CHECK(l == static_cast<uint8_t>(SemanticClass::kBackground));
}

TEST_CASE("classify_pixels survives additive gaussian noise") {
  WorldSpec spec = small_world();
  spec.times = {TimeOfDay::kDaytime};
  spec.weathers = {Weather::kClear};
  EvalConfig eval_config;
  CameraRig rig = make_rig(2, 32, 64);
  BEVScene scene = generate_scene(3, spec);
  auto result = render_scene(scene, rig, {});
  Rng rng(17);
  long agree = 0, total = 0;
  for (const auto& view : result.views) {
    Image noisy = view.image;
    for (auto& px : noisy.pixels()) {
      auto jitter = [&](uint8_t v) {
        return static_cast<uint8_t>(std::clamp<long>(
            std::lround(v + rng.normal() * 8.0), 0, 255));
      };
      px = {jitter(px.r), jitter(px.g), jitter(px.b)};
    }
    auto labels = classify_pixels(noisy, eval_config, scene.attrs);
    for (size_t i = 0; i < labels.pixels().size(); ++i) {
      agree += labels.pixels()[i] == view.labels.pixels()[i];
      ++total;
    }
  }
  CHECK(static_cast<double>(agree) / total >= 0.98);
}

TEST_CASE("layout_iou on oracle renders is exactly 1") {
  auto config = eval_experiment();
  CameraRig rig = config.make_camera_rig();
  std::vector<BEVScene> scenes;
  std::vector<std::vector<Image>> generated;
  for (uint64_t seed = 0; seed < 4; ++seed) {
    scenes.push_back(generate_scene(seed, config.world));
    generated.push_back(render_views(scenes.back(), rig, config.render));
  }
  CHECK(layout_iou(generated, scenes, rig, SemanticClass::kRoad, config.eval, config.render) ==
        doctest::Approx(1.0));
  CHECK(layout_iou(generated, scenes, rig, SemanticClass::kVehicle, config.eval,
                   config.render) == doctest::Approx(1.0));
}

TEST_CASE("layout_iou degenerate and arithmetic cases") {
  auto config = eval_experiment();
  config.world.object_count_min = 0;
  config.world.object_count_max = 0;
  config.world.topologies = {RoadTopology::kStraight};
  config.world.times = {TimeOfDay::kDaytime};
  config.world.weathers = {Weather::kClear};
  CameraRig rig = config.make_camera_rig();
  BEVScene scene = generate_scene(2, config.world);
  auto oracle = semantic_oracle(scene, rig, config.render);

  SUBCASE("disjoint prediction scores zero") {
    // Terrain-colored everywhere: road region empty in the prediction.
    std::vector<std::vector<Image>> generated(1);
    generated[0] = {Image(32, 64, palette::kTerrain), Image(32, 64, palette::kTerrain)};
    CHECK(layout_iou(generated, {scene}, rig, SemanticClass::kRoad, config.eval,
                     config.render) == doctest::Approx(0.0));
    // No vehicles anywhere: both empty -> 1 by convention.
    CHECK(layout_iou(generated, {scene}, rig, SemanticClass::kVehicle, config.eval,
                     config.render) == doctest::Approx(1.0));
  }

  SUBCASE("half-covered road with equal spill scores one third") {
    // Predicted road = top half of the true road plus an equal number of
    // false road pixels: I = R/2, U = 3R/2 -> IoU = 1/3 per view.
    std::vector<std::vector<Image>> generated(1);
    for (size_t v = 0; v < 2; ++v) {
      Image img(32, 64, palette::kTerrain);
      std::vector<std::pair<int, int>> road_px;
      for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 64; ++x)
          if (oracle[v].at(y, x) == static_cast<uint8_t>(SemanticClass::kRoad))
            road_px.push_back({y, x});
      size_t half = road_px.size() / 2;
      for (size_t i = 0; i < half; ++i)
        img.at(road_px[i].first, road_px[i].second) = palette::kDrivable;
      // Spill exactly `half` false positives into sky rows.
      size_t spilled = 0;
      for (int y = 0; y < 32 && spilled < half; ++y)
        for (int x = 0; x < 64 && spilled < half; ++x)
          if (oracle[v].at(y, x) == static_cast<uint8_t>(SemanticClass::kBackground) &&
              !(img.at(y, x) == palette::kDrivable)) {
            img.at(y, x) = palette::kDrivable;
            ++spilled;
          }
      generated[0].push_back(img);
    }
    double iou = layout_iou(generated, {scene}, rig, SemanticClass::kRoad, config.eval,
                            config.render);
    // Odd road-pixel counts shift the ratio by one pixel at most.
    CHECK(iou == doctest::Approx(1.0 / 3.0).epsilon(0.02));
  }

  SUBCASE("empty evaluation set rejected") {
    CHECK_THROWS_AS(layout_iou({}, {}, rig, SemanticClass::kRoad, config.eval, config.render),
                    UsageError);
  }
}

TEST_CASE("freq_fidelity identities and blur ordering") {
  auto config = eval_experiment();
  config.world.times = {TimeOfDay::kDaytime};
  CameraRig rig = config.make_camera_rig();
  BEVScene scene = generate_scene(5, config.world);
  auto refs = render_views(scene, rig, config.render);

  CHECK(freq_fidelity(refs, refs, config.freq) == doctest::Approx(0.0));

  // 3x3 box blur strips high frequencies.
  std::vector<Image> blurred;
  for (const auto& img : refs) {
    Image out = img;
    for (int y = 1; y + 1 < img.height(); ++y) {
      for (int x = 1; x + 1 < img.width(); ++x) {
        int r = 0, g = 0, b = 0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const auto& px = img.at(y + dy, x + dx);
            r += px.r;
            g += px.g;
            b += px.b;
          }
        out.at(y, x) = {static_cast<uint8_t>(r / 9), static_cast<uint8_t>(g / 9),
                        static_cast<uint8_t>(b / 9)};
      }
    }
    blurred.push_back(out);
  }
  double v = freq_fidelity(blurred, refs, config.freq);
  CHECK(v > 0.0);

  // Oracle: mean of per-image freq_loss values.
  double mean = 0;
  for (size_t i = 0; i < refs.size(); ++i) {
    auto a = image_to_tensor(blurred[i], torch::kFloat64).add(1.0).div(2.0);
    auto b = image_to_tensor(refs[i], torch::kFloat64).add(1.0).div(2.0);
    mean += freq_loss(a, b, config.freq).item<double>() / refs.size();
  }
  CHECK(v == doctest::Approx(mean).epsilon(1e-9));
}

TEST_CASE("dist_proxy identities and closed-form behavior") {
  EvalConfig eval_config;
  Rng rng(23);
  auto noise_image = [&](double base, double sigma) {
    Image img(16, 32);
    for (auto& px : img.pixels()) {
      auto ch = [&]() {
        return static_cast<uint8_t>(std::clamp<long>(
            std::lround(255.0 * (base + sigma * rng.normal())), 0, 255));
      };
      px = {ch(), ch(), ch()};
    }
    return img;
  };

  std::vector<Image> set_a, set_shifted, set_shifted2, set_b;
  for (int i = 0; i < 300; ++i) {
    Image img = noise_image(0.4, 0.02);
    set_a.push_back(img);
    Image s1 = img, s2 = img;
    for (size_t p = 0; p < img.pixels().size(); ++p) {
      auto lift = [&](uint8_t v, int d) {
        return static_cast<uint8_t>(std::clamp(static_cast<int>(v) + d, 0, 255));
      };
      s1.pixels()[p] = {lift(img.pixels()[p].r, 26), lift(img.pixels()[p].g, 26),
                        lift(img.pixels()[p].b, 26)};
      s2.pixels()[p] = {lift(img.pixels()[p].r, 52), lift(img.pixels()[p].g, 52),
                        lift(img.pixels()[p].b, 52)};
    }
    set_shifted.push_back(s1);
    set_shifted2.push_back(s2);
    set_b.push_back(noise_image(0.4 + 26.0 / 255.0, 0.02));
  }

  SUBCASE("identical sets score zero") {
    CHECK(dist_proxy(set_a, set_a, eval_config) <= 1e-8);
  }
  SUBCASE("order invariance") {
    auto shuffled = set_a;
    Rng shuffle_rng(9);
    shuffle_rng.shuffle(shuffled);
    CHECK(dist_proxy(set_a, shuffled, eval_config) <= 1e-8);
    CHECK(std::abs(dist_proxy(set_a, set_b, eval_config) -
                   dist_proxy(set_b, set_a, eval_config)) <= 1e-8);
  }
  SUBCASE("matches the closed-form Gaussian value") {
    // Shifting every pixel by a constant moves the feature mean and keeps the
    // covariance: the Frechet distance is exactly the squared feature-mean
    // offset, and doubling the shift quadruples it.
    double d1 = dist_proxy(set_a, set_shifted, eval_config);
    double d2 = dist_proxy(set_a, set_shifted2, eval_config);
    CHECK(d2 == doctest::Approx(4.0 * d1).epsilon(0.02));
    // Independent draws with the same mean offset land on the same value
    // within sampling error.
    double d_indep = dist_proxy(set_a, set_b, eval_config);
    CHECK(d_indep == doctest::Approx(d1).epsilon(0.05));
  }
  SUBCASE("empty sets rejected") {
    CHECK_THROWS_AS(dist_proxy({}, set_a, eval_config), UsageError);
  }
}

TEST_CASE("map_edit_protocol: identity edit and oracle generator") {
  auto config = eval_experiment();
  config.world.object_count_min = 1;
  config.world.object_count_max = 3;
  CameraRig rig = config.make_camera_rig();

  std::vector<BEVScene> scenes;
  std::vector<EditOp> identity_edits;
  Rng rng(41);
  for (uint64_t seed = 0; seed < 4; ++seed) {
    scenes.push_back(generate_scene(seed, config.world));
    EditOp op;
    op.kind = EditKind::kMoveBox;
    op.index = 0;
    op.delta = {0, 0};
    identity_edits.push_back(op);
  }

  // The "perfect" generator renders the conditioning scene through the oracle.
  SceneGenerator oracle_gen = [&](const BEVScene& s, uint64_t) {
    return render_views(s, rig, config.render);
  };

  SUBCASE("identity edits give zero margin") {
    auto report = map_edit_protocol(oracle_gen, scenes, identity_edits, rig, config, 7);
    CHECK(report.mean_margin_road == doctest::Approx(0.0));
    CHECK(report.mean_margin_vehicle == doctest::Approx(0.0));
  }

  SUBCASE("road-growing edits give positive margins and full success") {
    std::vector<EditOp> edits;
    std::vector<BEVScene> edit_scenes;
    for (const auto& scene : scenes) {
      auto op = propose_visible_road_branch(scene, rng, rig, config);
      if (op) {
        edits.push_back(*op);
        edit_scenes.push_back(scene);
      }
    }
    REQUIRE(edits.size() >= 2);
    auto report = map_edit_protocol(oracle_gen, edit_scenes, edits, rig, config, 7);
    CHECK(report.success_rate == doctest::Approx(1.0));
    CHECK(report.mean_margin_road > 0.0);
    for (const auto& c : report.cases) CHECK(c.edit_kind == "add_road_branch");
  }

  SUBCASE("mismatched inputs rejected") {
    CHECK_THROWS_AS(map_edit_protocol(oracle_gen, scenes, {}, rig, config, 7), UsageError);
  }
}

TEST_CASE("contact sheet assembles a grid") {
  Image a(8, 8, {255, 0, 0}), b(8, 8, {0, 255, 0});
  auto sheet = contact_sheet({{a, b}, {b, a}});
  CHECK(sheet.height() == 18);
  CHECK(sheet.width() == 18);
  CHECK(sheet.at(0, 0) == Rgb{255, 0, 0});
  CHECK(sheet.at(10, 10) == Rgb{255, 0, 0});
  CHECK(sheet.at(0, 10) == Rgb{0, 255, 0});
}

TEST_CASE("experiment config: defaults, strictness, hashing") {
  ExperimentConfig c = default_config();
  auto j = config_to_json(c);
  ExperimentConfig back = config_from_json(j);
  CHECK(config_hash(back) == config_hash(c));

  SUBCASE("unknown keys rejected with their path") {
    auto bad = j;
    bad["loss"]["lambda_typo"] = 1.0;
    CHECK_THROWS_WITH_AS(config_from_json(bad), doctest::Contains("config.loss.lambda_typo"),
                         ConfigError);
  }
  SUBCASE("hash tracks content") {
    auto j2 = j;
    j2["loss"]["lambda_freq"] = 0.75;
    CHECK(config_hash(config_from_json(j2)) != config_hash(c));
  }
  SUBCASE("partial configs take defaults") {
    nlohmann::json tiny = {{"seed", 3}};
    ExperimentConfig t = config_from_json(tiny);
    CHECK(t.seed == 3);
    CHECK(t.loss.lambda_freq == doctest::Approx(0.5));
    CHECK(t.sampler.ddim_steps == 25);
    CHECK(t.sampler.cfg_scale == doctest::Approx(3.0));
    CHECK(t.schedule.interval == 1000);
    CHECK(t.freq.tau == doctest::Approx(0.5));
    CHECK(t.loss.lambda_mi == doctest::Approx(0.05));
    CHECK(t.train.lr == doctest::Approx(6e-5));
  }
  SUBCASE("invalid values rejected") {
    auto bad = j;
    bad["rig"]["views"] = 5;
    CHECK_THROWS_AS(config_from_json(bad), ConfigError);
    auto bad2 = j;
    bad2["loss"]["tau"] = 1.5;
    CHECK_THROWS_AS(config_from_json(bad2), ConfigError);
  }
}
