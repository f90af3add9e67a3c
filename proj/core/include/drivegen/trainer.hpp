// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>

#include "drivegen/checkpoint.hpp"
#include "drivegen/config.hpp"
#include "drivegen/dataset.hpp"
#include "drivegen/model.hpp"
#include "drivegen/optimizer.hpp"

namespace drivegen {

struct LossRecord {
  long step = 0;
  int stage = 1;
  std::string phase;  // "road" | "object" | "dual"
  double total = 0, diff = 0, freq = 0, mi = 0;

  nlohmann::json to_json() const;
};

// Two-stage progressive trainer. Stage 1 alternates road/object phases per
// the parity schedule: the active adapter and the denoiser train while the
// idle adapter is neither injected nor updated. Stage 2 feeds both
// conditions, fine-tunes the adapters, and keeps the cross-view block frozen.
// All stochastic draws come from per-step named substreams, so a resumed run
// replays the uninterrupted trajectory bit-exactly.
class Trainer {
public:
  Trainer(const ExperimentConfig& config, std::shared_ptr<DatasetCache> data,
          const std::filesystem::path& out_dir);

  void init_fresh();
  void resume_from(const std::filesystem::path& ckpt_path);

  LossRecord step_once();
  // Runs to completion with periodic checkpoints and a JSONL metrics log.
  // Returns the final checkpoint path. `log` receives phase/stage
  // transitions; pass nullptr for silence. `stop_after` (for tests) halts
  // after that many additional steps.
  std::filesystem::path run(std::ostream* log = nullptr,
                            std::optional<long> stop_after = std::nullopt);

  long global_step() const { return step_; }
  int stage_at(long step) const;
  std::string phase_name_at(long step) const;
  long total_steps() const { return config_.schedule.stage1_steps + config_.schedule.stage2_steps; }

  DiffusionModel& model() { return model_; }
  AdamW& optimizer() { return *optimizer_; }

  // Parameter-name prefixes trained at `step` per the freeze policy.
  std::set<std::string> active_prefixes(long step) const;

  Checkpoint make_checkpoint() const;
  std::filesystem::path checkpoint_path(long step) const;

private:
  LossRecord forward_backward(long step);

  ExperimentConfig config_;
  std::shared_ptr<DatasetCache> data_;
  std::filesystem::path out_dir_;
  DiffusionModel model_{nullptr};
  std::unique_ptr<AdamW> optimizer_;
  long step_ = 0;
  std::string config_hash_;
};

// Builds a model from a checkpoint's embedded config and loads parameters.
DiffusionModel model_from_checkpoint(const Checkpoint& ckpt);
ExperimentConfig config_from_checkpoint(const Checkpoint& ckpt);

// End-to-end entry: load data, train (optionally resuming from the latest
// checkpoint in out_dir), return the final checkpoint path.
std::filesystem::path run_training(const ExperimentConfig& config,
                                   const std::filesystem::path& data_dir,
                                   const std::filesystem::path& out_dir, bool resume,
                                   std::ostream* log = nullptr);

}  // namespace drivegen
