// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "drivegen/config.hpp"
#include "drivegen/dataset.hpp"
#include "drivegen/scene.hpp"

using namespace drivegen;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  auto out_file = fs::temp_directory_path() / "drivegen_cli_out.txt";
  std::string cmd = std::string(DRIVEGEN_CLI_PATH) + " " + args + " > " + out_file.string() +
                    " 2>&1";
  int rc = std::system(cmd.c_str());
  std::ifstream in(out_file);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return {WEXITSTATUS(rc), text};
}

fs::path write_tiny_config() {
  ExperimentConfig c;
  c.seed = 7;
  c.world.bound_m = 40;
  c.world.object_count_min = 1;
  c.world.object_count_max = 3;
  c.world.object_distance_max = 26;
  c.rig.views = 2;
  c.rig.image_h = 32;
  c.rig.image_w = 64;
  c.model.channels = {16, 16, 24, 24};
  c.model.text_dim = 16;
  c.model.pool_dim = 8;
  c.model.heads = 4;
  c.schedule.interval = 3;
  c.schedule.stage1_steps = 6;
  c.schedule.stage2_steps = 3;
  c.train.batch_scenes = 1;
  c.train.checkpoint_interval = 5;
  c.data.count = 4;
  c.data.val_fraction = 0.25;
  auto path = fs::temp_directory_path() / "drivegen_cli_config.json";
  std::ofstream out(path);
  out << config_to_json(c).dump(2);
  return path;
}

}  // namespace

TEST_CASE("cli help and missing config behavior") {
  CHECK(run_cli("--help").code == 0);
  auto r = run_cli("gen-data --out /tmp/nowhere_x");
  CHECK(r.code == 2);
  CHECK(r.output.find("error[config]") != std::string::npos);
}

TEST_CASE("cli end-to-end: gen-data, validate, dry-run, edit") {
  auto config = write_tiny_config();
  auto ds = fs::temp_directory_path() / "drivegen_cli_ds";
  fs::remove_all(ds);

  auto gen = run_cli("--config " + config.string() + " gen-data --out " + ds.string());
  CHECK(gen.code == 0);
  CHECK(fs::exists(ds / "manifest.json"));

  SUBCASE("gen-data count 0 writes a valid empty manifest") {
    auto empty_ds = fs::temp_directory_path() / "drivegen_cli_ds0";
    fs::remove_all(empty_ds);
    auto r = run_cli("--config " + config.string() + " gen-data --count 0 --out " +
                     empty_ds.string());
    CHECK(r.code == 0);
    auto manifest = load_manifest(empty_ds);
    CHECK(manifest.count == 0);
    CHECK(manifest.entries.empty());
  }

  SUBCASE("validate passes on a fresh dataset") {
    auto r = run_cli("--config " + config.string() + " validate --data " + ds.string());
    CHECK(r.code == 0);
    CHECK(r.output.find("dataset ok") != std::string::npos);
  }

  SUBCASE("train --dry-run prints the schedule without training") {
    auto r = run_cli("--config " + config.string() + " train --data " + ds.string() +
                     " --dry-run");
    CHECK(r.code == 0);
    CHECK(r.output.find("stage1=6") != std::string::npos);
    CHECK(r.output.find("phase road") != std::string::npos);
    CHECK(r.output.find("frozen: cross_view") != std::string::npos);
  }

  SUBCASE("edit applies ops and errors map to exit codes") {
    auto scene_file = scene_path(ds, "scene_000000");
    auto edit_file = fs::temp_directory_path() / "drivegen_edit.json";
    {
      std::ofstream out(edit_file);
      out << R"({"op": "remove_box", "index": 0})";
    }
    auto out_dir = fs::temp_directory_path() / "drivegen_cli_edit";
    fs::remove_all(out_dir);
    auto r = run_cli("--config " + config.string() + " edit --scene " + scene_file.string() +
                     " --edit " + edit_file.string() + " --out " + out_dir.string());
    CHECK(r.code == 0);
    CHECK(fs::exists(out_dir / "scene.json"));
    CHECK(fs::exists(out_dir / "conditions" / "map_CAM_FRONT.png"));

    // Nonexistent element: not-found data error.
    {
      std::ofstream out(edit_file);
      out << R"({"op": "remove_box", "index": 99})";
    }
    auto bad = run_cli("--config " + config.string() + " edit --scene " + scene_file.string() +
                       " --edit " + edit_file.string() + " --out " + out_dir.string());
    CHECK(bad.code == 3);
    CHECK(bad.output.find("error[not-found]") != std::string::npos);

    // Geometrically invalid edit.
    {
      std::ofstream out(edit_file);
      out << R"({"op": "add_box", "category": "car", "center": [500, 0, 0.8],
                 "size": [4, 2, 1.5], "yaw": 0})";
    }
    auto geo = run_cli("--config " + config.string() + " edit --scene " + scene_file.string() +
                       " --edit " + edit_file.string() + " --out " + out_dir.string());
    CHECK(geo.code == 3);
    CHECK(geo.output.find("error[geometry]") != std::string::npos);
  }

  SUBCASE("train refuses a mismatched dataset without --force") {
    // Different seed -> different config hash than the dataset's.
    auto r = run_cli("--config " + config.string() + " --seed 99 train --data " + ds.string() +
                     " --out /tmp/drivegen_cli_should_refuse");
    CHECK(r.code == 2);
    CHECK(r.output.find("does not match") != std::string::npos);
  }
}

TEST_CASE("cli train/sample/eval round trip on a micro run") {
  auto config = write_tiny_config();
  auto ds = fs::temp_directory_path() / "drivegen_cli_ds2";
  auto run_dir = fs::temp_directory_path() / "drivegen_cli_run";
  fs::remove_all(ds);
  fs::remove_all(run_dir);

  REQUIRE(run_cli("--config " + config.string() + " gen-data --out " + ds.string()).code == 0);
  auto train = run_cli("--config " + config.string() + " train --data " + ds.string() +
                       " --out " + run_dir.string());
  CHECK(train.code == 0);
  REQUIRE(fs::exists(run_dir / "final.ckpt"));
  CHECK(fs::exists(run_dir / "metrics.jsonl"));

  auto sample_dir = fs::temp_directory_path() / "drivegen_cli_samples";
  fs::remove_all(sample_dir);
  auto sample = run_cli("sample --checkpoint " + (run_dir / "final.ckpt").string() +
                        " --data " + ds.string() + " --split val --steps 3 --out " +
                        sample_dir.string());
  CHECK(sample.code == 0);
  CHECK(fs::exists(sample_dir / "scene_000003" / "CAM_FRONT.png"));

  // Same seed twice: identical bytes; different cfg differs.
  auto sample_dir2 = fs::temp_directory_path() / "drivegen_cli_samples2";
  fs::remove_all(sample_dir2);
  REQUIRE(run_cli("sample --checkpoint " + (run_dir / "final.ckpt").string() + " --data " +
                  ds.string() + " --split val --steps 3 --out " + sample_dir2.string())
              .code == 0);
  auto bytes = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  };
  CHECK(bytes(sample_dir / "scene_000003" / "CAM_FRONT.png") ==
        bytes(sample_dir2 / "scene_000003" / "CAM_FRONT.png"));

  auto sample_dir3 = fs::temp_directory_path() / "drivegen_cli_samples3";
  fs::remove_all(sample_dir3);
  REQUIRE(run_cli("sample --checkpoint " + (run_dir / "final.ckpt").string() + " --data " +
                  ds.string() + " --split val --steps 3 --cfg 1 --out " + sample_dir3.string())
              .code == 0);
  CHECK(bytes(sample_dir / "scene_000003" / "CAM_FRONT.png") !=
        bytes(sample_dir3 / "scene_000003" / "CAM_FRONT.png"));

  auto eval_dir = fs::temp_directory_path() / "drivegen_cli_eval";
  fs::remove_all(eval_dir);
  auto eval = run_cli("eval --checkpoint " + (run_dir / "final.ckpt").string() + " --data " +
                      ds.string() + " --edits auto:add_road_branch:1 --sheets 1 --out " +
                      eval_dir.string());
  CHECK(eval.code == 0);
  REQUIRE(fs::exists(eval_dir / "eval_report.json"));
  std::ifstream in(eval_dir / "eval_report.json");
  nlohmann::json report;
  in >> report;
  CHECK(report.contains("road_iou"));
  CHECK(report.contains("config_hash"));
  CHECK(report.contains("edit_protocol"));
  CHECK(fs::exists(eval_dir / "sheet_0.png"));
}
