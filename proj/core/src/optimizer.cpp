// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#include "drivegen/optimizer.hpp"

#include <cmath>

#include "drivegen/errors.hpp"

namespace drivegen {

AdamW::AdamW(std::vector<std::pair<std::string, torch::Tensor>> named_params,
             const AdamWConfig& config)
    : config_(config) {
  for (auto& [name, param] : named_params) {
    Slot slot;
    slot.name = name;
    slot.param = param;
    slot.m = torch::zeros_like(param);
    slot.v = torch::zeros_like(param);
    slots_.push_back(std::move(slot));
  }
}

void AdamW::step(const std::set<std::string>& active_prefixes) {
  torch::NoGradGuard guard;
  for (auto& slot : slots_) {
    bool active = false;
    for (const auto& prefix : active_prefixes) {
      if (slot.name.rfind(prefix, 0) == 0) {
        active = true;
        break;
      }
    }
    if (!active) continue;
    auto grad = slot.param.grad();
    if (!grad.defined()) continue;

    slot.steps += 1;
    if (config_.weight_decay > 0)
      slot.param.mul_(1.0 - config_.lr * config_.weight_decay);
    slot.m.mul_(config_.beta1).add_(grad, 1.0 - config_.beta1);
    slot.v.mul_(config_.beta2).addcmul_(grad, grad, 1.0 - config_.beta2);
    const double bc1 = 1.0 - std::pow(config_.beta1, slot.steps);
    const double bc2 = 1.0 - std::pow(config_.beta2, slot.steps);
    auto m_hat = slot.m / bc1;
    auto v_hat = slot.v / bc2;
    slot.param.addcdiv_(m_hat, v_hat.sqrt().add_(config_.eps), -config_.lr);
  }
}

void AdamW::zero_grad() {
  for (auto& slot : slots_) {
    auto grad = slot.param.grad();
    if (grad.defined()) {
      grad.detach_();
      grad.zero_();
    }
  }
}

std::vector<std::pair<std::string, torch::Tensor>> AdamW::state_tensors() const {
  std::vector<std::pair<std::string, torch::Tensor>> out;
  out.reserve(slots_.size() * 2);
  for (const auto& slot : slots_) {
    out.emplace_back("adam.m." + slot.name, slot.m);
    out.emplace_back("adam.v." + slot.name, slot.v);
  }
  return out;
}

std::map<std::string, long> AdamW::step_counts() const {
  std::map<std::string, long> out;
  for (const auto& slot : slots_) out[slot.name] = slot.steps;
  return out;
}

void AdamW::load_state(const std::map<std::string, torch::Tensor>& tensors,
                       const std::map<std::string, long>& steps) {
  torch::NoGradGuard guard;
  for (auto& slot : slots_) {
    auto m_it = tensors.find("adam.m." + slot.name);
    auto v_it = tensors.find("adam.v." + slot.name);
    if (m_it == tensors.end() || v_it == tensors.end())
      throw DataError("optimizer state missing for parameter " + slot.name);
    slot.m.copy_(m_it->second);
    slot.v.copy_(v_it->second);
    auto s_it = steps.find(slot.name);
    slot.steps = s_it == steps.end() ? 0 : s_it->second;
  }
}

}  // namespace drivegen
