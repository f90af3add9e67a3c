// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "drivegen/caption.hpp"

namespace drivegen {

struct VlmConfig {
  std::string endpoint;  // e.g. http://127.0.0.1:8080/v1/caption
  std::string prompt;    // empty -> bundled prompt template
  int retries = 2;       // validation-failure retries with a repair instruction
  int timeout_s = 60;
  std::string api_key;   // optional bearer token
};

// The bundled prompt template (verbatim text asset).
const std::string& default_vlm_prompt();

// Posts the view images and prompt as multipart form data to a
// chat-completion-style endpoint, validates the reply against the captioning
// schema, and retries with an appended repair instruction on validation
// failure. Throws TransportError on network problems and
// CaptionUnavailableError after the retry budget is exhausted (callers fall
// back to describe_scene).
CaptionSet vlm_request(const std::vector<std::filesystem::path>& images, const VlmConfig& config);

}  // namespace drivegen
