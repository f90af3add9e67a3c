// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#include "drivegen/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "drivegen/errors.hpp"
#include "drivegen/rng.hpp"

namespace drivegen {

namespace {

// Strict object reader: every key must be consumed exactly once.
class Reader {
public:
  Reader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + " must be a JSON object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }

  bool has_object(const char* key) {
    if (!j_.contains(key)) return false;
    seen_.insert(key);
    return true;
  }

  const nlohmann::json& sub(const char* key) const { return j_.at(key); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.contains(it.key()))
        throw ConfigError("unknown config key: " + path_ + "." + it.key());
    }
  }

private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename E>
std::vector<E> enums_from(const std::vector<std::string>& names, E (*parse)(const std::string&)) {
  std::vector<E> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(parse(n));
  return out;
}

template <typename E>
std::vector<std::string> enums_to(const std::vector<E>& values) {
  std::vector<std::string> out;
  out.reserve(values.size());
  for (E v : values) out.push_back(to_string(v));
  return out;
}

}  // namespace

CameraRig ExperimentConfig::make_camera_rig() const {
  return make_rig(rig.views, rig.image_h, rig.image_w, rig.fov_deg, rig.camera_height_m);
}

CaptionParams ExperimentConfig::caption_params() const {
  CaptionParams p;
  p.min_visible_area_px = caption.min_visible_area_px;
  p.max_spatial_objects = caption.max_spatial_objects;
  return p;
}

ExperimentConfig default_config() { return ExperimentConfig{}; }

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  Reader root(j, "config");
  root.get("seed", c.seed);

  if (root.has_object("world")) {
    Reader r(root.sub("world"), "config.world");
    r.get("bound_m", c.world.bound_m);
    r.get("object_count_min", c.world.object_count_min);
    r.get("object_count_max", c.world.object_count_max);
    r.get("off_road_prob", c.world.off_road_prob);
    r.get("object_distance_min", c.world.object_distance_min);
    r.get("object_distance_max", c.world.object_distance_max);
    r.get("road_width_min", c.world.road_width_min);
    r.get("road_width_max", c.world.road_width_max);
    r.get("lane_band_width", c.world.lane_band_width);
    std::vector<std::string> names;
    names = enums_to(c.world.topologies);
    r.get("topologies", names);
    c.world.topologies = enums_from(names, topology_from_string);
    names = enums_to(c.world.times);
    r.get("times", names);
    c.world.times = enums_from(names, time_from_string);
    names = enums_to(c.world.weathers);
    r.get("weathers", names);
    c.world.weathers = enums_from(names, weather_from_string);
    names = enums_to(c.world.surroundings);
    r.get("surroundings", names);
    c.world.surroundings = enums_from(names, surroundings_from_string);
    names = enums_to(c.world.categories);
    r.get("categories", names);
    c.world.categories = enums_from(names, category_from_string);
    r.finish();
  }

  if (root.has_object("rig")) {
    Reader r(root.sub("rig"), "config.rig");
    r.get("views", c.rig.views);
    r.get("image_h", c.rig.image_h);
    r.get("image_w", c.rig.image_w);
    r.get("fov_deg", c.rig.fov_deg);
    r.get("camera_height_m", c.rig.camera_height_m);
    r.finish();
  }

  if (root.has_object("model")) {
    Reader r(root.sub("model"), "config.model");
    r.get("channels", c.model.channels);
    r.get("text_dim", c.model.text_dim);
    r.get("pool_dim", c.model.pool_dim);
    r.get("heads", c.model.heads);
    r.get("attn_stages", c.model.attn_stages);
    r.get("cross_view", c.model.cross_view);
    r.get("condition_mandatory", c.model.condition_mandatory);
    r.get("dtype", c.model.dtype);
    r.get("timesteps", c.model.schedule.timesteps);
    r.get("beta_start", c.model.schedule.beta_start);
    r.get("beta_end", c.model.schedule.beta_end);
    r.finish();
  }

  if (root.has_object("schedule")) {
    Reader r(root.sub("schedule"), "config.schedule");
    r.get("interval", c.schedule.interval);
    std::string phase = to_string(c.schedule.start_phase);
    r.get("start_phase", phase);
    c.schedule.start_phase = phase_from_string(phase);
    r.get("stage1_steps", c.schedule.stage1_steps);
    r.get("stage2_steps", c.schedule.stage2_steps);
    r.get("warmup_offset", c.schedule.warmup_offset);
    r.finish();
  }

  if (root.has_object("loss")) {
    Reader r(root.sub("loss"), "config.loss");
    r.get("lambda_freq", c.loss.lambda_freq);
    r.get("lambda_mi", c.loss.lambda_mi);
    r.get("mi_temperature", c.loss.mi_temperature);
    r.get("mi_sign_flip", c.loss.mi_sign_flip);
    r.get("tau", c.freq.tau);
    r.finish();
  }

  if (root.has_object("sampler")) {
    Reader r(root.sub("sampler"), "config.sampler");
    r.get("ddim_steps", c.sampler.ddim_steps);
    r.get("cfg_scale", c.sampler.cfg_scale);
    r.get("eta", c.sampler.eta);
    r.finish();
  }

  if (root.has_object("train")) {
    Reader r(root.sub("train"), "config.train");
    r.get("lr", c.train.lr);
    r.get("beta1", c.train.beta1);
    r.get("beta2", c.train.beta2);
    r.get("weight_decay", c.train.weight_decay);
    r.get("batch_scenes", c.train.batch_scenes);
    r.get("cond_dropout", c.train.cond_dropout);
    r.get("checkpoint_interval", c.train.checkpoint_interval);
    r.get("denoiser_trainable_stage2", c.train.denoiser_trainable_stage2);
    r.finish();
  }

  if (root.has_object("caption")) {
    Reader r(root.sub("caption"), "config.caption");
    r.get("min_visible_area_px", c.caption.min_visible_area_px);
    r.get("max_spatial_objects", c.caption.max_spatial_objects);
    r.get("vlm_endpoint", c.caption.vlm_endpoint);
    r.get("vlm_retries", c.caption.vlm_retries);
    r.finish();
  }

  if (root.has_object("eval")) {
    Reader r(root.sub("eval"), "config.eval");
    r.get("palette_delta", c.eval.palette_delta);
    r.get("proxy_dim", c.eval.proxy_dim);
    r.get("proxy_seed", c.eval.proxy_seed);
    r.finish();
  }

  if (root.has_object("render")) {
    Reader r(root.sub("render"), "config.render");
    r.get("texture_amplitude", c.render.texture_amplitude);
    r.get("texture_cell_m", c.render.texture_cell_m);
    r.get("texture_cell_px", c.render.texture_cell_px);
    r.get("far_m", c.render.far_m);
    r.get("noise_seed", c.render.noise_seed);
    r.finish();
  }

  if (root.has_object("data")) {
    Reader r(root.sub("data"), "config.data");
    r.get("count", c.data.count);
    r.get("val_fraction", c.data.val_fraction);
    r.finish();
  }

  root.finish();

  // The model sees the rig's pixel grid.
  c.model.image_h = c.rig.image_h;
  c.model.image_w = c.rig.image_w;
  c.model.views = c.rig.views;
  c.render.lane_band_width_m = c.world.lane_band_width;
  validate_config(c);
  return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["seed"] = c.seed;
  j["world"] = {{"bound_m", c.world.bound_m},
                {"object_count_min", c.world.object_count_min},
                {"object_count_max", c.world.object_count_max},
                {"off_road_prob", c.world.off_road_prob},
                {"object_distance_min", c.world.object_distance_min},
                {"object_distance_max", c.world.object_distance_max},
                {"road_width_min", c.world.road_width_min},
                {"road_width_max", c.world.road_width_max},
                {"lane_band_width", c.world.lane_band_width},
                {"topologies", enums_to(c.world.topologies)},
                {"times", enums_to(c.world.times)},
                {"weathers", enums_to(c.world.weathers)},
                {"surroundings", enums_to(c.world.surroundings)},
                {"categories", enums_to(c.world.categories)}};
  j["rig"] = {{"views", c.rig.views},
              {"image_h", c.rig.image_h},
              {"image_w", c.rig.image_w},
              {"fov_deg", c.rig.fov_deg},
              {"camera_height_m", c.rig.camera_height_m}};
  j["model"] = {{"channels", c.model.channels},
                {"text_dim", c.model.text_dim},
                {"pool_dim", c.model.pool_dim},
                {"heads", c.model.heads},
                {"attn_stages", c.model.attn_stages},
                {"cross_view", c.model.cross_view},
                {"condition_mandatory", c.model.condition_mandatory},
                {"dtype", c.model.dtype},
                {"timesteps", c.model.schedule.timesteps},
                {"beta_start", c.model.schedule.beta_start},
                {"beta_end", c.model.schedule.beta_end}};
  j["schedule"] = {{"interval", c.schedule.interval},
                   {"start_phase", to_string(c.schedule.start_phase)},
                   {"stage1_steps", c.schedule.stage1_steps},
                   {"stage2_steps", c.schedule.stage2_steps},
                   {"warmup_offset", c.schedule.warmup_offset}};
  j["loss"] = {{"lambda_freq", c.loss.lambda_freq},
               {"lambda_mi", c.loss.lambda_mi},
               {"mi_temperature", c.loss.mi_temperature},
               {"mi_sign_flip", c.loss.mi_sign_flip},
               {"tau", c.freq.tau}};
  j["sampler"] = {{"ddim_steps", c.sampler.ddim_steps},
                  {"cfg_scale", c.sampler.cfg_scale},
                  {"eta", c.sampler.eta}};
  j["train"] = {{"lr", c.train.lr},
                {"beta1", c.train.beta1},
                {"beta2", c.train.beta2},
                {"weight_decay", c.train.weight_decay},
                {"batch_scenes", c.train.batch_scenes},
                {"cond_dropout", c.train.cond_dropout},
                {"checkpoint_interval", c.train.checkpoint_interval},
                {"denoiser_trainable_stage2", c.train.denoiser_trainable_stage2}};
  j["caption"] = {{"min_visible_area_px", c.caption.min_visible_area_px},
                  {"max_spatial_objects", c.caption.max_spatial_objects},
                  {"vlm_endpoint", c.caption.vlm_endpoint},
                  {"vlm_retries", c.caption.vlm_retries}};
  j["eval"] = {{"palette_delta", c.eval.palette_delta},
               {"proxy_dim", c.eval.proxy_dim},
               {"proxy_seed", c.eval.proxy_seed}};
  j["render"] = {{"texture_amplitude", c.render.texture_amplitude},
                 {"texture_cell_m", c.render.texture_cell_m},
                 {"texture_cell_px", c.render.texture_cell_px},
                 {"far_m", c.render.far_m},
                 {"noise_seed", c.render.noise_seed}};
  j["data"] = {{"count", c.data.count}, {"val_fraction", c.data.val_fraction}};
  return j;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error in " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const ExperimentConfig& config) {
  uint64_t h = fnv1a(config_to_json(config).dump());
  std::ostringstream ss;
  ss << std::hex << h;
  return ss.str();
}

void validate_config(const ExperimentConfig& c) {
  validate_world_spec(c.world);
  validate_model_config(c.model);
  validate_phase_schedule(c.schedule);
  validate_loss_config(c.loss, c.freq);
  NoiseSchedule schedule(c.model.schedule);
  validate_sampler_config(c.sampler, schedule);
  if (c.rig.views != 2 && c.rig.views != 6)
    throw ConfigError("rig views must be 2 or 6");
  if (c.train.batch_scenes < 1) throw ConfigError("batch_scenes must be >= 1");
  if (c.train.cond_dropout < 0 || c.train.cond_dropout >= 1)
    throw ConfigError("cond_dropout must be in [0, 1)");
  if (c.train.checkpoint_interval < 1) throw ConfigError("checkpoint_interval must be >= 1");
  if (c.data.count < 0) throw ConfigError("data count must be >= 0");
  if (c.data.val_fraction < 0 || c.data.val_fraction >= 1)
    throw ConfigError("val_fraction must be in [0, 1)");
  if (c.caption.vlm_retries < 0) throw ConfigError("vlm_retries must be >= 0");
  if (c.eval.proxy_dim < 1) throw ConfigError("proxy_dim must be >= 1");
}

}  // namespace drivegen
