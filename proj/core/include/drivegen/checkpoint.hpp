// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace drivegen {

inline constexpr const char* kCheckpointFormat = "drivegen.ckpt.v1";

// Single-archive checkpoint: versioned JSON header (config, training
// position, schedule constants, optimizer step counts) plus raw named
// tensors. Byte layout is deterministic; writes are atomic
// (write-temp-then-rename) so a killed run never leaves a torn file.
struct Checkpoint {
  nlohmann::json meta;
  std::map<std::string, torch::Tensor> tensors;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace drivegen
