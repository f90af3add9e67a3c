// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#include "drivegen/pipeline.hpp"

#include "drivegen/caption.hpp"
#include "drivegen/codec.hpp"
#include "drivegen/conditioning.hpp"

namespace drivegen {

SampleRequest make_sample_request(const BEVScene& scene, const CameraRig& rig,
                                  const ExperimentConfig& config, torch::Dtype dtype) {
  ConditionBundle bundle = make_condition_bundle(scene, rig, config.render);
  Tokenizer tokenizer;
  CaptionSet captions = describe_scene(scene, rig, tokenizer, config.caption_params(),
                                       config.render);
  SampleRequest req;
  std::vector<torch::Tensor> maps, boxes;
  for (size_t v = 0; v < rig.cameras.size(); ++v) {
    maps.push_back(image_to_tensor(bundle.map_images[v], dtype));
    boxes.push_back(image_to_tensor(bundle.box_images[v], dtype));
    req.tokens.push_back(tokenizer.encode(captions.serialized[v].text));
  }
  req.map_cond = torch::stack(maps);
  req.box_cond = torch::stack(boxes);
  req.views_per_scene = static_cast<int>(rig.cameras.size());
  return req;
}

std::vector<Image> generate_scene_images(DiffusionModel& model, const BEVScene& scene,
                                         const CameraRig& rig, const ExperimentConfig& config,
                                         uint64_t seed) {
  auto req = make_sample_request(scene, rig, config, model->config().torch_dtype());
  return ddim_sample(model, req, config.sampler, seed);
}

}  // namespace drivegen
