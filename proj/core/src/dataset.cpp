// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#include "drivegen/dataset.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "drivegen/caption.hpp"
#include "drivegen/codec.hpp"
#include "drivegen/conditioning.hpp"
#include "drivegen/errors.hpp"
#include "drivegen/image.hpp"
#include "drivegen/render.hpp"
#include "drivegen/rng.hpp"
#include "drivegen/vlm.hpp"
#include "drivegen/workers.hpp"

namespace drivegen {

namespace fs = std::filesystem;

std::vector<std::string> Manifest::ids(const std::string& split) const {
  std::vector<std::string> out;
  for (const auto& e : entries)
    if (e.split == split) out.push_back(e.id);
  return out;
}

namespace {

std::string scene_id(int index) {
  std::ostringstream ss;
  ss << "scene_" << std::setw(6) << std::setfill('0') << index;
  return ss.str();
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(1, '\t') << "\n";
}

nlohmann::json read_json(const fs::path& path) {
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

GrayImage mask_to_png(const GrayImage& mask01) {
  GrayImage out(mask01.height(), mask01.width());
  for (size_t i = 0; i < mask01.pixels().size(); ++i)
    out.pixels()[i] = mask01.pixels()[i] ? 255 : 0;
  return out;
}

}  // namespace

fs::path scene_path(const fs::path& dir, const std::string& id) {
  return dir / "scenes" / (id + ".json");
}
fs::path caption_path(const fs::path& dir, const std::string& id) {
  return dir / "captions" / (id + ".json");
}
fs::path image_path(const fs::path& dir, const std::string& id, const std::string& view) {
  return dir / "images" / id / (view + ".png");
}
fs::path map_cond_path(const fs::path& dir, const std::string& id, const std::string& view) {
  return dir / "conditions" / id / ("map_" + view + ".png");
}
fs::path box_cond_path(const fs::path& dir, const std::string& id, const std::string& view) {
  return dir / "conditions" / id / ("box_" + view + ".png");
}
fs::path mask_path(const fs::path& dir, const std::string& id, const std::string& view,
                   const std::string& kind) {
  return dir / "conditions" / id / ("mask_" + kind + "_" + view + ".png");
}

Manifest write_dataset(const ExperimentConfig& config, const fs::path& out_dir, int count,
                       int jobs) {
  if (count < 0) throw ConfigError("dataset count must be >= 0");
  std::error_code ec;
  fs::create_directories(out_dir / "scenes", ec);
  fs::create_directories(out_dir / "images", ec);
  fs::create_directories(out_dir / "conditions", ec);
  fs::create_directories(out_dir / "captions", ec);
  if (!fs::exists(out_dir / "scenes"))
    throw DataError("output path not writable: " + out_dir.string());

  CameraRig rig = config.make_camera_rig();
  Tokenizer tokenizer;
  const std::string hash = config_hash(config);

  Manifest manifest;
  manifest.config_hash = hash;
  manifest.seed = config.seed;
  manifest.count = count;
  manifest.entries.resize(count);

  const int train_cut = static_cast<int>(std::lround(count * (1.0 - config.data.val_fraction)));

  parallel_for(count, jobs, [&](int i) {
    const std::string id = scene_id(i);
    const uint64_t scene_seed = mix_seed(config.seed, "world", static_cast<uint64_t>(i));
    BEVScene scene = generate_scene(scene_seed, config.world);
    validate_scene(scene, config.world);

    auto scene_json = scene_to_json(scene);
    scene_json["id"] = id;
    scene_json["config_hash"] = hash;
    write_json(scene_path(out_dir, id), scene_json);

    RenderResult render = render_scene(scene, rig, config.render);
    ConditionBundle bundle = make_condition_bundle(scene, rig, config.render);
    fs::create_directories(out_dir / "images" / id);
    fs::create_directories(out_dir / "conditions" / id);
    std::vector<fs::path> image_files;
    for (size_t v = 0; v < rig.cameras.size(); ++v) {
      const std::string& view = to_string(rig.cameras[v].name);
      write_png(image_path(out_dir, id, view), render.views[v].image);
      image_files.push_back(image_path(out_dir, id, view));
      write_png(map_cond_path(out_dir, id, view), bundle.map_images[v]);
      write_png(box_cond_path(out_dir, id, view), bundle.box_images[v]);
      write_png(mask_path(out_dir, id, view, "map"), mask_to_png(bundle.masks[v].m_map));
      write_png(mask_path(out_dir, id, view, "box"), mask_to_png(bundle.masks[v].m_box));
      write_png(mask_path(out_dir, id, view, "bg"), mask_to_png(bundle.masks[v].m_bg));
    }

    CaptionSet captions;
    if (!config.caption.vlm_endpoint.empty()) {
      VlmConfig vlm;
      vlm.endpoint = config.caption.vlm_endpoint;
      vlm.retries = config.caption.vlm_retries;
      try {
        captions = vlm_request(image_files, vlm);
        for (const auto& d : captions.descriptions)
          captions.serialized.push_back(serialize_caption(d, tokenizer));
      } catch (const CaptionUnavailableError&) {
        captions = describe_scene(scene, rig, tokenizer, config.caption_params(), config.render);
      }
    } else {
      captions = describe_scene(scene, rig, tokenizer, config.caption_params(), config.render);
    }

    nlohmann::json cap_json;
    cap_json["descriptions"] = caption_set_to_json(captions);
    auto serialized = nlohmann::json::object();
    for (size_t v = 0; v < captions.views.size(); ++v) {
      serialized[to_string(captions.views[v])] = {
          {"text", captions.serialized[v].text},
          {"token_count", captions.serialized[v].token_count}};
    }
    cap_json["serialized"] = serialized;
    cap_json["config_hash"] = hash;
    write_json(caption_path(out_dir, id), cap_json);

    manifest.entries[i] = {id, scene_seed, i < train_cut ? "train" : "val"};
  });

  nlohmann::json mj;
  mj["version"] = manifest.version;
  mj["config_hash"] = manifest.config_hash;
  mj["seed"] = manifest.seed;
  mj["count"] = manifest.count;
  auto entries = nlohmann::json::array();
  for (const auto& e : manifest.entries)
    entries.push_back({{"id", e.id}, {"scene_seed", e.scene_seed}, {"split", e.split}});
  mj["entries"] = entries;
  write_json(out_dir / "manifest.json", mj);
  write_json(out_dir / "config.json", config_to_json(config));
  return manifest;
}

Manifest load_manifest(const fs::path& dir) {
  auto j = read_json(dir / "manifest.json");
  Manifest m;
  m.version = j.at("version").get<std::string>();
  if (m.version != kManifestVersion)
    throw DataError("unsupported manifest version: " + m.version);
  m.config_hash = j.at("config_hash").get<std::string>();
  m.seed = j.at("seed").get<uint64_t>();
  m.count = j.at("count").get<int>();
  for (const auto& e : j.at("entries")) {
    m.entries.push_back({e.at("id").get<std::string>(), e.at("scene_seed").get<uint64_t>(),
                         e.at("split").get<std::string>()});
  }
  return m;
}

void validate_dataset(const ExperimentConfig& config, const fs::path& dir, int jobs) {
  Manifest manifest = load_manifest(dir);
  CameraRig rig = config.make_camera_rig();
  const int lh = config.rig.image_h / kLatentDownsample;
  const int lw = config.rig.image_w / kLatentDownsample;
  parallel_for(static_cast<int>(manifest.entries.size()), jobs, [&](int i) {
    const auto& entry = manifest.entries[i];
    BEVScene scene = scene_from_json(read_json(scene_path(dir, entry.id)));
    validate_scene(scene, config.world);
    auto masks = make_region_masks(scene, rig, lh, lw, config.render);
    for (size_t v = 0; v < rig.cameras.size(); ++v) {
      const auto& m = masks[v];
      for (int y = 0; y < lh; ++y) {
        for (int x = 0; x < lw; ++x) {
          int total = m.m_map.at(y, x) + m.m_box.at(y, x) + m.m_bg.at(y, x);
          if (total != 1)
            throw ValidationError("mask partition violated in " + entry.id + " view " +
                                  to_string(rig.cameras[v].name));
        }
      }
      // Stored masks must match the recomputed ones.
      auto stored = read_png_gray(mask_path(dir, entry.id, to_string(rig.cameras[v].name), "map"));
      for (int y = 0; y < lh; ++y)
        for (int x = 0; x < lw; ++x)
          if ((stored.at(y, x) != 0) != (m.m_map.at(y, x) != 0))
            throw ValidationError("stored map mask mismatch in " + entry.id);
    }
    auto cap = read_json(caption_path(dir, entry.id));
    std::vector<ViewName> views;
    for (const auto& cam : rig.cameras) views.push_back(cam.name);
    validate_caption(cap.at("descriptions").dump(), views);
  });
}

// -- DatasetCache ------------------------------------------------------------------

DatasetCache::DatasetCache(const fs::path& dir, const Manifest& manifest,
                           const std::string& split, const ExperimentConfig& config) {
  CameraRig rig = config.make_camera_rig();
  views_ = static_cast<int>(rig.cameras.size());
  Tokenizer tokenizer;
  for (const auto& entry : manifest.entries) {
    if (entry.split != split) continue;
    SceneTensors st;
    std::vector<torch::Tensor> renders, maps, boxes, masks;
    auto cap = read_json(caption_path(dir, entry.id));
    for (const auto& cam : rig.cameras) {
      const std::string& view = to_string(cam.name);
      renders.push_back(image_to_u8_tensor(read_png(image_path(dir, entry.id, view))));
      maps.push_back(image_to_u8_tensor(read_png(map_cond_path(dir, entry.id, view))));
      boxes.push_back(image_to_u8_tensor(read_png(box_cond_path(dir, entry.id, view))));
      auto m_map = read_png_gray(mask_path(dir, entry.id, view, "map"));
      auto m_box = read_png_gray(mask_path(dir, entry.id, view, "box"));
      auto m_bg = read_png_gray(mask_path(dir, entry.id, view, "bg"));
      auto t = torch::empty({3, m_map.height(), m_map.width()}, torch::kUInt8);
      auto acc = t.accessor<uint8_t, 3>();
      for (int y = 0; y < m_map.height(); ++y) {
        for (int x = 0; x < m_map.width(); ++x) {
          acc[0][y][x] = m_map.at(y, x) ? 1 : 0;
          acc[1][y][x] = m_box.at(y, x) ? 1 : 0;
          acc[2][y][x] = m_bg.at(y, x) ? 1 : 0;
        }
      }
      masks.push_back(t);
      std::string text =
          cap.at("serialized").at(view).at("text").get<std::string>();
      st.tokens.push_back(tokenizer.encode(text));
    }
    st.render_u8 = torch::stack(renders);
    st.map_u8 = torch::stack(maps);
    st.box_u8 = torch::stack(boxes);
    st.masks_u8 = torch::stack(masks);
    scenes_.push_back(std::move(st));
    ids_.push_back(entry.id);
  }
  if (scenes_.empty()) throw DataError("dataset split '" + split + "' is empty");
}

Batch DatasetCache::make_batch(const std::vector<size_t>& scene_indices,
                               torch::Dtype dtype) const {
  std::vector<torch::Tensor> renders, maps, boxes, masks;
  Batch batch;
  for (size_t idx : scene_indices) {
    const auto& st = scenes_.at(idx);
    renders.push_back(st.render_u8);
    maps.push_back(st.map_u8);
    boxes.push_back(st.box_u8);
    masks.push_back(st.masks_u8);
    for (const auto& t : st.tokens) batch.tokens.push_back(t);
  }
  auto render_u8 = torch::stack(renders).flatten(0, 1);  // [B,3,H,W]
  batch.z0 = encode_latent(u8_to_unit(render_u8, dtype));
  batch.map_cond = u8_to_unit(torch::stack(maps).flatten(0, 1), dtype);
  batch.box_cond = u8_to_unit(torch::stack(boxes).flatten(0, 1), dtype);
  auto m = torch::stack(masks).flatten(0, 1).to(dtype);  // [B,3,lh,lw]
  batch.m_map = m.narrow(1, 0, 1);
  batch.m_box = m.narrow(1, 1, 1);
  batch.m_bg = m.narrow(1, 2, 1);
  batch.views = views_;
  return batch;
}

}  // namespace drivegen
