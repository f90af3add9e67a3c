// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "drivegen/config.hpp"
#include "drivegen/scene.hpp"

namespace drivegen {

inline constexpr const char* kManifestVersion = "drivegen.dataset.v1";

struct ManifestEntry {
  std::string id;        // scene_000123
  uint64_t scene_seed = 0;
  std::string split;     // "train" | "val"
};

struct Manifest {
  std::string version = kManifestVersion;
  std::string config_hash;
  uint64_t seed = 0;
  int count = 0;
  std::vector<ManifestEntry> entries;

  std::vector<std::string> ids(const std::string& split) const;
};

// File layout under the dataset root.
std::filesystem::path scene_path(const std::filesystem::path& dir, const std::string& id);
std::filesystem::path caption_path(const std::filesystem::path& dir, const std::string& id);
std::filesystem::path image_path(const std::filesystem::path& dir, const std::string& id,
                                 const std::string& view);
std::filesystem::path map_cond_path(const std::filesystem::path& dir, const std::string& id,
                                    const std::string& view);
std::filesystem::path box_cond_path(const std::filesystem::path& dir, const std::string& id,
                                    const std::string& view);
std::filesystem::path mask_path(const std::filesystem::path& dir, const std::string& id,
                                const std::string& view, const std::string& kind);

// Generates scenes, renders, conditions, masks, and captions under out_dir
// and writes manifest.json (+ a config.json provenance copy). Fully seeded;
// identical (config, count) produce identical files. Fans out over `jobs`
// workers with per-scene seeding, merged in index order.
Manifest write_dataset(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                       int count, int jobs);

Manifest load_manifest(const std::filesystem::path& dir);

// Re-runs the scene and conditioning invariant suite over a dataset
// directory; throws ValidationError on the first violation.
void validate_dataset(const ExperimentConfig& config, const std::filesystem::path& dir,
                      int jobs);

// -- In-memory training cache ---------------------------------------------------

struct SceneTensors {
  torch::Tensor render_u8;  // [V,3,H,W] uint8
  torch::Tensor map_u8;     // [V,3,H,W] uint8
  torch::Tensor box_u8;     // [V,3,H,W] uint8
  torch::Tensor masks_u8;   // [V,3,lh,lw] uint8: map, box, bg planes
  std::vector<std::vector<int32_t>> tokens;  // caption ids per view
};

struct Batch {
  torch::Tensor z0;        // [B,192,lh,lw]
  torch::Tensor map_cond;  // [B,3,H,W]
  torch::Tensor box_cond;  // [B,3,H,W]
  torch::Tensor m_map, m_box, m_bg;  // [B,1,lh,lw]
  std::vector<std::vector<int32_t>> tokens;
  int views = 1;
};

class DatasetCache {
public:
  DatasetCache(const std::filesystem::path& dir, const Manifest& manifest,
               const std::string& split, const ExperimentConfig& config);

  size_t size() const { return scenes_.size(); }
  const SceneTensors& scene(size_t i) const { return scenes_.at(i); }
  const std::string& id(size_t i) const { return ids_.at(i); }

  Batch make_batch(const std::vector<size_t>& scene_indices, torch::Dtype dtype) const;

private:
  std::vector<SceneTensors> scenes_;
  std::vector<std::string> ids_;
  int views_ = 0;
};

}  // namespace drivegen
