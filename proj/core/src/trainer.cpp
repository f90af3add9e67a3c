// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#include "drivegen/trainer.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "drivegen/errors.hpp"
#include "drivegen/objectives.hpp"
#include "drivegen/rng.hpp"

namespace drivegen {

namespace fs = std::filesystem;

nlohmann::json LossRecord::to_json() const {
  return {{"step", step},   {"stage", stage}, {"phase", phase},
          {"total", total}, {"diff", diff},   {"freq", freq},
          {"mi", mi}};
}

Trainer::Trainer(const ExperimentConfig& config, std::shared_ptr<DatasetCache> data,
                 const fs::path& out_dir)
    : config_(config), data_(std::move(data)), out_dir_(out_dir) {
  validate_config(config_);
  fs::create_directories(out_dir_);
  model_ = DiffusionModel(config_.model);
  AdamWConfig opt;
  opt.lr = config_.train.lr;
  opt.beta1 = config_.train.beta1;
  opt.beta2 = config_.train.beta2;
  opt.weight_decay = config_.train.weight_decay;
  std::vector<std::pair<std::string, torch::Tensor>> named;
  for (auto& item : model_->named_parameters()) named.emplace_back(item.key(), item.value());
  optimizer_ = std::make_unique<AdamW>(std::move(named), opt);
  config_hash_ = config_hash(config_);
}

void Trainer::init_fresh() {
  model_->init_parameters(config_.seed);
  step_ = 0;
}

int Trainer::stage_at(long step) const {
  return step < config_.schedule.stage1_steps ? 1 : 2;
}

std::string Trainer::phase_name_at(long step) const {
  if (stage_at(step) == 2) return "dual";
  return to_string(phase_at(step, config_.schedule));
}

std::set<std::string> Trainer::active_prefixes(long step) const {
  if (stage_at(step) == 1) {
    Phase phase = phase_at(step, config_.schedule);
    std::set<std::string> active = {"denoiser.", "cross_view.", "text_encoder."};
    active.insert(phase == Phase::kRoad ? "map_adapter." : "box_adapter.");
    return active;
  }
  // Stage 2: both adapters fine-tune, the cross-view block stays frozen.
  std::set<std::string> active = {"map_adapter.", "box_adapter.", "text_encoder."};
  if (config_.train.denoiser_trainable_stage2) active.insert("denoiser.");
  return active;
}

LossRecord Trainer::forward_backward(long step) {
  const int B = config_.train.batch_scenes;
  const int V = config_.rig.views;
  const auto dtype = config_.model.torch_dtype();
  const int T = model_->schedule().timesteps();

  // Per-step substreams: any step can be regenerated without history.
  Rng data_rng = substream(config_.seed, "data", static_cast<uint64_t>(step));
  Rng noise_rng = substream(config_.seed, "noise", static_cast<uint64_t>(step));
  Rng drop_rng = substream(config_.seed, "drop", static_cast<uint64_t>(step));

  // Distinct scene draws (with-replacement fallback for tiny datasets).
  std::vector<size_t> indices;
  const size_t n = data_->size();
  for (int i = 0; i < B; ++i) {
    size_t pick = 0;
    for (int attempt = 0; attempt < 16; ++attempt) {
      pick = static_cast<size_t>(data_rng.uniform_int(0, static_cast<int64_t>(n) - 1));
      if (std::find(indices.begin(), indices.end(), pick) == indices.end() ||
          indices.size() >= n)
        break;
    }
    indices.push_back(pick);
  }

  Batch batch = data_->make_batch(indices, dtype);
  const int64_t batch_size = batch.z0.size(0);

  std::vector<int> ts(static_cast<size_t>(batch_size));
  for (auto& t : ts) t = static_cast<int>(noise_rng.uniform_int(1, T));
  auto eps = torch::empty_like(batch.z0);
  if (dtype == torch::kFloat64) {
    noise_rng.fill_normal(eps.data_ptr<double>(), static_cast<size_t>(eps.numel()));
  } else {
    noise_rng.fill_normal(eps.data_ptr<float>(), static_cast<size_t>(eps.numel()));
  }
  auto z_t = model_->schedule().add_noise(batch.z0, ts, eps);

  // Joint text+geometry condition dropout per scene (all views together).
  std::vector<bool> scene_kept(static_cast<size_t>(B));
  for (int i = 0; i < B; ++i)
    scene_kept[i] = !drop_rng.bernoulli(config_.train.cond_dropout);
  auto keep = torch::empty({batch_size, 1, 1, 1}, torch::TensorOptions().dtype(dtype));
  std::vector<std::vector<int32_t>> tokens(static_cast<size_t>(batch_size));
  std::vector<int64_t> kept_rows;
  for (int64_t i = 0; i < batch_size; ++i) {
    bool k = scene_kept[static_cast<size_t>(i / V)];
    keep.index_put_({i, 0, 0, 0}, k ? 1.0 : 0.0);
    if (k) {
      tokens[static_cast<size_t>(i)] = batch.tokens[static_cast<size_t>(i)];
      kept_rows.push_back(i);
    }
  }
  auto text_emb = model_->encode_text(tokens);

  const int stage = stage_at(step);
  LossRecord record;
  record.step = step;
  record.stage = stage;
  record.phase = phase_name_at(step);

  auto masked_features = [&](AdapterFeatures feat) {
    for (auto& f : feat.stages) {
      // Broadcast keep over channels and space at each scale.
      f = f * keep;
    }
    return feat;
  };

  StageLossInputs in;
  in.eps = eps;
  in.z_t = z_t;
  in.z0 = batch.z0;
  in.alpha_bar = model_->schedule().alpha_bar_tensor(ts, dtype);
  in.m_map = batch.m_map;
  in.m_box = batch.m_box;
  in.m_bg = batch.m_bg;

  LossTerms terms;
  if (stage == 1) {
    Phase phase = phase_at(step, config_.schedule);
    if (phase == Phase::kRoad) {
      auto feat = masked_features(model_->run_map_adapter(batch.map_cond));
      in.eps_hat = model_->predict_eps(z_t, ts, text_emb, feat, std::nullopt, V, true);
      terms = road_loss(in, config_.loss, config_.freq);
    } else {
      auto feat = masked_features(model_->run_box_adapter(batch.box_cond));
      in.eps_hat = model_->predict_eps(z_t, ts, text_emb, std::nullopt, feat, V, true);
      terms = object_loss(in, config_.loss, config_.freq);
    }
  } else {
    auto map_feat = masked_features(model_->run_map_adapter(batch.map_cond));
    auto box_feat = masked_features(model_->run_box_adapter(batch.box_cond));
    in.eps_hat = model_->predict_eps(z_t, ts, text_emb, map_feat, box_feat, V, true);
    std::optional<torch::Tensor> f_m, f_b;
    if (!kept_rows.empty()) {
      auto rows = torch::tensor(kept_rows, torch::kLong);
      f_m = map_feat.pooled.index_select(0, rows);
      f_b = box_feat.pooled.index_select(0, rows);
    }
    terms = stage2_loss(in, f_m, f_b, config_.loss, config_.freq);
  }

  record.total = terms.total.item<double>();
  record.diff = terms.diff;
  record.freq = terms.freq;
  record.mi = terms.mi;

  optimizer_->zero_grad();
  if (terms.total.requires_grad()) {
    terms.total.backward();
    optimizer_->step(active_prefixes(step));
  }
  return record;
}

LossRecord Trainer::step_once() {
  if (step_ >= total_steps()) throw UsageError("training already complete");
  LossRecord record = forward_backward(step_);
  ++step_;
  return record;
}

Checkpoint Trainer::make_checkpoint() const {
  Checkpoint ckpt;
  ckpt.meta["config"] = config_to_json(config_);
  ckpt.meta["config_hash"] = config_hash_;
  ckpt.meta["step"] = step_;
  ckpt.meta["stage"] = step_ >= total_steps() ? 2 : stage_at(step_);
  ckpt.meta["phase"] = step_ >= total_steps() ? "dual" : phase_name_at(step_);
  ckpt.meta["schedule_alpha_bar"] = model_->schedule().alpha_bar_all();
  ckpt.meta["adam_steps"] = optimizer_->step_counts();
  for (const auto& item : model_->named_parameters())
    ckpt.tensors.emplace("param." + item.key(), item.value().detach().clone());
  for (const auto& [name, tensor] : optimizer_->state_tensors())
    ckpt.tensors.emplace(name, tensor.detach().clone());
  return ckpt;
}

fs::path Trainer::checkpoint_path(long step) const {
  std::ostringstream ss;
  ss << "ckpt_" << std::setw(7) << std::setfill('0') << step << ".ckpt";
  return out_dir_ / ss.str();
}

void Trainer::resume_from(const fs::path& ckpt_path) {
  Checkpoint ckpt = load_checkpoint(ckpt_path);
  const std::string saved_hash = ckpt.meta.at("config_hash").get<std::string>();
  if (saved_hash != config_hash_)
    throw ConfigError("checkpoint config hash " + saved_hash +
                      " does not match current config " + config_hash_);
  torch::NoGradGuard guard;
  for (auto& item : model_->named_parameters()) {
    auto it = ckpt.tensors.find("param." + item.key());
    if (it == ckpt.tensors.end())
      throw DataError("checkpoint missing parameter " + item.key());
    item.value().copy_(it->second);
  }
  std::map<std::string, long> steps =
      ckpt.meta.at("adam_steps").get<std::map<std::string, long>>();
  optimizer_->load_state(ckpt.tensors, steps);
  step_ = ckpt.meta.at("step").get<long>();
}

fs::path Trainer::run(std::ostream* log, std::optional<long> stop_after) {
  std::ofstream metrics(out_dir_ / "metrics.jsonl", step_ == 0 ? std::ios::trunc : std::ios::app);
  if (!metrics) throw DataError("cannot write metrics log in " + out_dir_.string());

  std::string last_phase;
  long steps_done = 0;
  while (step_ < total_steps()) {
    if (stop_after && steps_done >= *stop_after) break;
    std::string phase = phase_name_at(step_);
    if (log && phase != last_phase) {
      (*log) << "[step " << step_ << "] stage " << stage_at(step_) << " phase " << phase
             << "\n";
      last_phase = phase;
    }
    LossRecord record = step_once();
    ++steps_done;
    metrics << record.to_json().dump() << "\n";
    const bool stage_boundary = step_ == config_.schedule.stage1_steps;
    if (step_ % config_.train.checkpoint_interval == 0 || stage_boundary ||
        step_ == total_steps()) {
      save_checkpoint(checkpoint_path(step_), make_checkpoint());
    }
  }
  metrics.flush();

  if (step_ >= total_steps()) {
    fs::path final_path = out_dir_ / "final.ckpt";
    save_checkpoint(final_path, make_checkpoint());
    if (log) (*log) << "[step " << step_ << "] training complete\n";
    return final_path;
  }
  fs::path partial = checkpoint_path(step_);
  save_checkpoint(partial, make_checkpoint());
  return partial;
}

DiffusionModel model_from_checkpoint(const Checkpoint& ckpt) {
  ExperimentConfig config = config_from_checkpoint(ckpt);
  DiffusionModel model(config.model);
  torch::NoGradGuard guard;
  for (auto& item : model->named_parameters()) {
    auto it = ckpt.tensors.find("param." + item.key());
    if (it == ckpt.tensors.end())
      throw DataError("checkpoint missing parameter " + item.key());
    item.value().copy_(it->second);
  }
  return model;
}

ExperimentConfig config_from_checkpoint(const Checkpoint& ckpt) {
  return config_from_json(ckpt.meta.at("config"));
}

std::filesystem::path run_training(const ExperimentConfig& config, const fs::path& data_dir,
                                   const fs::path& out_dir, bool resume, std::ostream* log) {
  Manifest manifest = load_manifest(data_dir);
  auto data = std::make_shared<DatasetCache>(data_dir, manifest, "train", config);
  Trainer trainer(config, data, out_dir);
  if (resume) {
    // Latest checkpoint in out_dir, if any.
    fs::path best;
    long best_step = -1;
    if (fs::exists(out_dir)) {
      for (const auto& e : fs::directory_iterator(out_dir)) {
        const std::string name = e.path().filename().string();
        if (name.rfind("ckpt_", 0) == 0 && name.ends_with(".ckpt")) {
          long s = std::stol(name.substr(5, name.size() - 10));
          if (s > best_step) {
            best_step = s;
            best = e.path();
          }
        }
      }
    }
    if (best_step >= 0) {
      trainer.resume_from(best);
      if (log) (*log) << "resumed from " << best.string() << "\n";
    } else {
      trainer.init_fresh();
    }
  } else {
    trainer.init_fresh();
  }
  return trainer.run(log);
}

}  // namespace drivegen
