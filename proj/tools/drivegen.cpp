// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
//
// drivegen: dataset generation, progressive two-stage training, DDIM
// sampling, scene editing, and oracle-based evaluation, wired end to end.

#include <torch/torch.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "drivegen/caption.hpp"
#include "drivegen/codec.hpp"
#include "drivegen/conditioning.hpp"
#include "drivegen/config.hpp"
#include "drivegen/dataset.hpp"
#include "drivegen/errors.hpp"
#include "drivegen/evaluation.hpp"
#include "drivegen/phase.hpp"
#include "drivegen/pipeline.hpp"
#include "drivegen/render.hpp"
#include "drivegen/trainer.hpp"
#include "drivegen/workers.hpp"

namespace fs = std::filesystem;
using namespace drivegen;

namespace {

struct GlobalArgs {
  std::string config_path;
  uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 1;
  bool force = false;
};

ExperimentConfig load_config(const GlobalArgs& args) {
  if (args.config_path.empty()) throw ConfigError("--config is required");
  ExperimentConfig config = load_config_file(args.config_path);
  if (args.seed_set) config.seed = args.seed;
  return config;
}

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("JSON parse error in " + path.string() + ": " + e.what());
  }
  return j;
}

void write_json_file(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(1, '\t') << "\n";
}

void check_hash(const std::string& got, const std::string& want, const char* what, bool force) {
  if (got == want) return;
  std::string msg = std::string(what) + " config hash " + got +
                    " does not match expected " + want +
                    " (artifacts come from a different configuration; pass --force to override)";
  if (force) {
    std::cerr << "warning: " << msg << "\n";
    return;
  }
  throw ConfigError(msg);
}

std::vector<BEVScene> load_split_scenes(const fs::path& data_dir, const Manifest& manifest,
                                        const std::string& split, int limit) {
  std::vector<BEVScene> scenes;
  for (const auto& e : manifest.entries) {
    if (e.split != split) continue;
    scenes.push_back(scene_from_json(read_json_file(scene_path(data_dir, e.id))));
    if (limit > 0 && static_cast<int>(scenes.size()) >= limit) break;
  }
  return scenes;
}

int cmd_gen_data(const GlobalArgs& g, const std::string& out, int count) {
  ExperimentConfig config = load_config(g);
  int n = count >= 0 ? count : config.data.count;
  Manifest manifest = write_dataset(config, out, n, g.jobs);
  std::cout << "wrote " << manifest.count << " scenes to " << out << " (config "
            << manifest.config_hash << ")\n";
  return 0;
}

int cmd_validate(const GlobalArgs& g, const std::string& data_dir) {
  ExperimentConfig config = load_config(g);
  Manifest manifest = load_manifest(data_dir);
  check_hash(manifest.config_hash, config_hash(config), "dataset", g.force);
  validate_dataset(config, data_dir, g.jobs);
  std::cout << "dataset ok: " << manifest.count << " scenes pass the invariant suite\n";
  return 0;
}

int cmd_train(const GlobalArgs& g, const std::string& data_dir, const std::string& out,
              bool dry_run, bool resume) {
  ExperimentConfig config = load_config(g);
  if (dry_run) {
    validate_config(config);
    const auto& s = config.schedule;
    std::cout << "schedule: stage1=" << s.stage1_steps << " steps, stage2=" << s.stage2_steps
              << " steps, interval K=" << s.interval << ", start phase "
              << to_string(s.start_phase) << ", warmup offset " << s.warmup_offset << "\n";
    std::cout << "phase switches in stage 1: " << phase_switches(s) << "\n";
    if (s.stage1_steps > 0)
      std::cout << "terminal stage-1 phase: " << to_string(terminal_phase(s)) << "\n";
    long step = 0;
    while (step < s.stage1_steps) {
      long block_end = std::min(s.stage1_steps, (step / s.interval + 1) * s.interval);
      std::cout << "  steps [" << step << ", " << block_end << "): phase "
                << to_string(phase_at(step, s)) << " | trainable: denoiser, cross_view, "
                << "text_encoder, "
                << (phase_at(step, s) == Phase::kRoad ? "map_adapter" : "box_adapter") << "\n";
      step = block_end;
    }
    if (s.stage2_steps > 0) {
      std::cout << "  steps [" << s.stage1_steps << ", " << s.stage1_steps + s.stage2_steps
                << "): dual conditions | trainable: map_adapter, box_adapter, text_encoder"
                << (config.train.denoiser_trainable_stage2 ? ", denoiser" : "")
                << " | frozen: cross_view\n";
    }
    return 0;
  }
  Manifest manifest = load_manifest(data_dir);
  check_hash(manifest.config_hash, config_hash(config), "dataset", g.force);
  auto final_path = run_training(config, data_dir, out, resume, &std::cout);
  std::cout << "final checkpoint: " << final_path.string() << "\n";
  return 0;
}

int cmd_sample(const GlobalArgs& g, const std::string& ckpt_path, const std::string& scene_file,
               const std::string& data_dir, const std::string& split, const std::string& out,
               int count, double cfg_override, int steps_override) {
  Checkpoint ckpt = load_checkpoint(ckpt_path);
  ExperimentConfig config = config_from_checkpoint(ckpt);
  if (g.seed_set) config.seed = g.seed;
  if (cfg_override >= 0) config.sampler.cfg_scale = cfg_override;
  if (steps_override > 0) config.sampler.ddim_steps = steps_override;
  DiffusionModel model = model_from_checkpoint(ckpt);
  CameraRig rig = config.make_camera_rig();

  std::vector<std::pair<std::string, BEVScene>> scenes;
  if (!scene_file.empty()) {
    scenes.emplace_back(fs::path(scene_file).stem().string(),
                        scene_from_json(read_json_file(scene_file)));
  } else {
    if (data_dir.empty()) throw ConfigError("sample needs --scene or --data");
    Manifest manifest = load_manifest(data_dir);
    check_hash(manifest.config_hash, ckpt.meta.at("config_hash").get<std::string>(), "dataset",
               g.force);
    for (const auto& e : manifest.entries) {
      if (e.split != split) continue;
      scenes.emplace_back(e.id, scene_from_json(read_json_file(scene_path(data_dir, e.id))));
      if (count > 0 && static_cast<int>(scenes.size()) >= count) break;
    }
  }
  if (scenes.empty()) throw UsageError("no scenes selected for sampling");

  fs::create_directories(out);
  for (size_t i = 0; i < scenes.size(); ++i) {
    uint64_t sample_seed = mix_seed(config.seed, "sample", i);
    auto images = generate_scene_images(model, scenes[i].second, rig, config, sample_seed);
    for (size_t v = 0; v < images.size(); ++v) {
      fs::create_directories(fs::path(out) / scenes[i].first);
      write_png(fs::path(out) / scenes[i].first /
                    (to_string(rig.cameras[v].name) + ".png"),
                images[v]);
    }
  }
  std::cout << "sampled " << scenes.size() << " scenes to " << out << "\n";
  return 0;
}

int cmd_edit(const GlobalArgs& g, const std::string& scene_file, const std::string& edit_file,
             const std::string& out) {
  ExperimentConfig config = load_config(g);
  BEVScene scene = scene_from_json(read_json_file(scene_file));
  nlohmann::json ej = read_json_file(edit_file);
  std::vector<EditOp> ops;
  if (ej.is_array()) {
    for (const auto& item : ej) ops.push_back(edit_from_json(item));
  } else {
    ops.push_back(edit_from_json(ej));
  }
  BEVScene edited = scene;
  for (const auto& op : ops) edited = edit_scene(edited, op, config.world.bound_m);
  validate_scene(edited, config.world);

  fs::create_directories(fs::path(out) / "conditions");
  auto scene_json = scene_to_json(edited);
  scene_json["config_hash"] = config_hash(config);
  write_json_file(fs::path(out) / "scene.json", scene_json);
  CameraRig rig = config.make_camera_rig();
  ConditionBundle bundle = make_condition_bundle(edited, rig, config.render);
  for (size_t v = 0; v < rig.cameras.size(); ++v) {
    const std::string& view = to_string(rig.cameras[v].name);
    write_png(fs::path(out) / "conditions" / ("map_" + view + ".png"), bundle.map_images[v]);
    write_png(fs::path(out) / "conditions" / ("box_" + view + ".png"), bundle.box_images[v]);
  }
  std::cout << "edited scene written to " << out << " (topology "
            << to_string(edited.road_topology) << ")\n";
  return 0;
}

int cmd_eval(const GlobalArgs& g, const std::string& ckpt_path, const std::string& data_dir,
             const std::string& edits_arg, const std::string& out, int count, int sheets) {
  Checkpoint ckpt = load_checkpoint(ckpt_path);
  ExperimentConfig config = config_from_checkpoint(ckpt);
  DiffusionModel model = model_from_checkpoint(ckpt);
  CameraRig rig = config.make_camera_rig();

  Manifest manifest = load_manifest(data_dir);
  check_hash(manifest.config_hash, ckpt.meta.at("config_hash").get<std::string>(), "dataset",
             g.force);
  std::vector<BEVScene> scenes = load_split_scenes(data_dir, manifest, "val", count);
  if (scenes.empty()) throw UsageError("evaluation set is empty");

  // Generate, then score against the deterministic oracle.
  std::vector<std::vector<Image>> generated(scenes.size());
  std::vector<Image> flat_gen, flat_ref;
  for (size_t i = 0; i < scenes.size(); ++i) {
    uint64_t seed = mix_seed(config.seed, "eval-sample", i);
    generated[i] = generate_scene_images(model, scenes[i], rig, config, seed);
    auto refs = render_views(scenes[i], rig, config.render);
    for (size_t v = 0; v < refs.size(); ++v) {
      flat_gen.push_back(generated[i][v]);
      flat_ref.push_back(refs[v]);
    }
  }

  EvalReport report;
  report.config_hash = config_hash(config);
  report.road_iou = layout_iou(generated, scenes, rig, SemanticClass::kRoad, config.eval,
                               config.render);
  report.vehicle_iou = layout_iou(generated, scenes, rig, SemanticClass::kVehicle, config.eval,
                                  config.render);
  report.freq_fidelity = freq_fidelity(flat_gen, flat_ref, config.freq);
  report.dist_proxy = dist_proxy(flat_gen, flat_ref, config.eval);

  if (!edits_arg.empty()) {
    std::vector<EditOp> edits;
    std::vector<BEVScene> edit_scenes;
    if (edits_arg.rfind("auto:", 0) == 0) {
      // auto:add_road_branch:<count>
      auto rest = edits_arg.substr(5);
      auto colon = rest.find(':');
      int n = colon == std::string::npos ? static_cast<int>(scenes.size())
                                         : std::stoi(rest.substr(colon + 1));
      Rng rng = substream(config.seed, "auto-edits");
      for (const auto& scene : scenes) {
        if (static_cast<int>(edits.size()) >= n) break;
        auto op = propose_visible_road_branch(scene, rng, rig, config);
        if (op) {
          edits.push_back(*op);
          edit_scenes.push_back(scene);
        }
      }
    } else {
      nlohmann::json ej = read_json_file(edits_arg);
      for (const auto& item : ej) {
        const std::string id = item.at("scene").get<std::string>();
        edit_scenes.push_back(scene_from_json(read_json_file(scene_path(data_dir, id))));
        edits.push_back(edit_from_json(item.at("edit")));
      }
    }
    if (!edits.empty()) {
      SceneGenerator gen = [&](const BEVScene& s, uint64_t seed) {
        return generate_scene_images(model, s, rig, config, seed);
      };
      report.edits = map_edit_protocol(gen, edit_scenes, edits, rig, config, config.seed);
    }
  }

  fs::create_directories(out);
  write_json_file(fs::path(out) / "eval_report.json", report.to_json());
  for (int i = 0; i < sheets && i < static_cast<int>(scenes.size()); ++i) {
    auto refs = render_views(scenes[i], rig, config.render);
    ConditionBundle bundle = make_condition_bundle(scenes[i], rig, config.render);
    std::vector<std::vector<Image>> rows;
    for (size_t v = 0; v < rig.cameras.size(); ++v) {
      rows.push_back({refs[v], bundle.map_images[v], bundle.box_images[v], generated[i][v]});
    }
    write_png(fs::path(out) / ("sheet_" + std::to_string(i) + ".png"), contact_sheet(rows));
  }
  std::cout << "road_iou=" << report.road_iou << " vehicle_iou=" << report.vehicle_iou
            << " freq_fidelity=" << report.freq_fidelity << " dist_proxy=" << report.dist_proxy;
  if (report.edits) {
    std::cout << " edit_margin=" << report.edits->mean_margin_road
              << " edit_success=" << report.edits->success_rate;
  }
  std::cout << "\nreport: " << (fs::path(out) / "eval_report.json").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  torch::set_num_threads(1);  // numerics independent of the host thread count

  CLI::App app{"synthetic driving-scene generation: data, training, sampling, evaluation"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--config", g.config_path, "experiment config JSON")->envname("DRIVEGEN_CONFIG");
  auto* seed_opt = app.add_option("--seed", g.seed, "root seed override");
  app.add_option("--jobs", g.jobs, "worker threads for data generation/evaluation");
  app.add_flag("--force", g.force, "override config-hash mismatches");

  std::string out, data_dir, scene_file, edit_file, ckpt_path, split = "val", edits_arg;
  int count = -1, sheets = 4, steps_override = -1;
  double cfg_override = -1;
  bool dry_run = false, resume = false;

  auto* gen = app.add_subcommand("gen-data", "generate a seeded dataset");
  gen->add_option("--out", out, "output directory")->required();
  gen->add_option("--count", count, "number of scenes (default: config data.count)");

  auto* val = app.add_subcommand("validate", "run the dataset invariant suite");
  val->add_option("--data", data_dir, "dataset directory")->required();

  auto* train = app.add_subcommand("train", "run two-stage progressive training");
  train->add_option("--data", data_dir, "dataset directory")->required();
  train->add_option("--out", out, "run directory for checkpoints and metrics");
  train->add_flag("--dry-run", dry_run, "print the resolved schedule and exit");
  train->add_flag("--resume", resume, "resume from the latest checkpoint in --out");

  auto* sample = app.add_subcommand("sample", "generate images from a checkpoint");
  sample->add_option("--checkpoint", ckpt_path, "model checkpoint")->required();
  sample->add_option("--scene", scene_file, "single scene JSON");
  sample->add_option("--data", data_dir, "dataset directory (sample a split)");
  sample->add_option("--split", split, "dataset split (default val)");
  sample->add_option("--out", out, "output directory")->required();
  sample->add_option("--count", count, "max scenes to sample");
  sample->add_option("--cfg", cfg_override, "classifier-free guidance scale override");
  sample->add_option("--steps", steps_override, "DDIM step count override");

  auto* edit = app.add_subcommand("edit", "apply a scene edit and regenerate conditions");
  edit->add_option("--scene", scene_file, "scene JSON")->required();
  edit->add_option("--edit", edit_file, "edit op JSON (object or array)")->required();
  edit->add_option("--out", out, "output directory")->required();

  auto* eval = app.add_subcommand("eval", "oracle-based evaluation of a checkpoint");
  eval->add_option("--checkpoint", ckpt_path, "model checkpoint")->required();
  eval->add_option("--data", data_dir, "dataset directory")->required();
  eval->add_option("--edits", edits_arg,
                   "edit protocol: JSON file or auto:add_road_branch:<count>");
  eval->add_option("--out", out, "report directory")->required();
  eval->add_option("--count", count, "max val scenes to evaluate");
  eval->add_option("--sheets", sheets, "contact sheets to write");

  try {
    app.parse(argc, argv);
    g.seed_set = seed_opt->count() > 0;
    if (gen->parsed()) return cmd_gen_data(g, out, count);
    if (val->parsed()) return cmd_validate(g, data_dir);
    if (train->parsed()) {
      if (!dry_run && out.empty()) throw ConfigError("train needs --out");
      return cmd_train(g, data_dir, out, dry_run, resume);
    }
    if (sample->parsed())
      return cmd_sample(g, ckpt_path, scene_file, data_dir, split, out, count, cfg_override,
                        steps_override);
    if (edit->parsed()) return cmd_edit(g, scene_file, edit_file, out);
    if (eval->parsed()) return cmd_eval(g, ckpt_path, data_dir, edits_arg, out, count, sheets);
    return 0;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ConfigError& e) {
    std::cerr << "error[config]: " << e.what() << "\n";
    return 2;
  } catch (const GeometryError& e) {
    std::cerr << "error[geometry]: " << e.what() << "\n";
    return 3;
  } catch (const NotFoundError& e) {
    std::cerr << "error[not-found]: " << e.what() << "\n";
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "error[validation]: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "error[data]: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error[runtime]: " << e.what() << "\n";
    return 4;
  }
}
