// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <torch/torch.h>

#include <map>
#include <set>
#include <string>
#include <vector>

namespace drivegen {

struct AdamWConfig {
  double lr = 6e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

// Decoupled-weight-decay Adam over named parameters. State (first/second
// moments, per-parameter step counts) serializes exactly for bit-identical
// resume. A step only touches parameters whose name matches the active
// prefix set and whose gradient is defined, so frozen parameters stay
// bit-identical.
class AdamW {
public:
  AdamW(std::vector<std::pair<std::string, torch::Tensor>> named_params,
        const AdamWConfig& config);

  // `active_prefixes`: parameter names must start with one of these.
  void step(const std::set<std::string>& active_prefixes);
  void zero_grad();

  const AdamWConfig& config() const { return config_; }
  void set_lr(double lr) { config_.lr = lr; }

  // Serialization: "adam.m.<name>", "adam.v.<name>" tensors plus step counts.
  std::vector<std::pair<std::string, torch::Tensor>> state_tensors() const;
  std::map<std::string, long> step_counts() const;
  void load_state(const std::map<std::string, torch::Tensor>& tensors,
                  const std::map<std::string, long>& steps);

private:
  struct Slot {
    std::string name;
    torch::Tensor param;
    torch::Tensor m;
    torch::Tensor v;
    long steps = 0;
  };
  std::vector<Slot> slots_;
  AdamWConfig config_;
};

}  // namespace drivegen
