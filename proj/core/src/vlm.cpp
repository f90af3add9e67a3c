// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#include "drivegen/vlm.hpp"

#include <httplib.h>

#include <fstream>
#include <sstream>

#include "drivegen/errors.hpp"

namespace drivegen {

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read file: " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Splits "http://host:port/path" into (scheme://host:port, /path).
std::pair<std::string, std::string> split_endpoint(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint URL missing scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

// Chat-completion-style replies wrap the payload under choices[0].message.content.
std::string extract_payload(const std::string& body) {
  auto parsed = nlohmann::json::parse(body, nullptr, false);
  if (!parsed.is_discarded() && parsed.is_object() && parsed.contains("choices")) {
    const auto& choices = parsed.at("choices");
    if (choices.is_array() && !choices.empty()) {
      const auto& first = choices.at(0);
      if (first.contains("message") && first.at("message").contains("content"))
        return first.at("message").at("content").get<std::string>();
      if (first.contains("text")) return first.at("text").get<std::string>();
    }
  }
  return body;
}

}  // namespace

const std::string& default_vlm_prompt() {
  static const std::string prompt = read_file(std::filesystem::path(DRIVEGEN_ASSET_DIR) /
                                              "vlm_prompt.txt");
  return prompt;
}

CaptionSet vlm_request(const std::vector<std::filesystem::path>& images, const VlmConfig& config) {
  auto [host, path] = split_endpoint(config.endpoint);
  httplib::Client client(host);
  client.set_connection_timeout(config.timeout_s);
  client.set_read_timeout(config.timeout_s);

  std::string prompt = config.prompt.empty() ? default_vlm_prompt() : config.prompt;
  std::string last_error;

  for (int attempt = 0; attempt <= config.retries; ++attempt) {
    httplib::MultipartFormDataItems items;
    std::string effective_prompt = prompt;
    if (attempt > 0) {
      effective_prompt += "\n\nYour previous reply was rejected: " + last_error +
                          ". Output ONLY the JSON object with exactly the required structure.";
    }
    items.push_back({"prompt", effective_prompt, "", "text/plain"});
    for (const auto& img : images) {
      items.push_back({"images", read_file(img), img.filename().string(), "image/png"});
    }

    httplib::Headers headers;
    if (!config.api_key.empty()) headers.emplace("Authorization", "Bearer " + config.api_key);

    auto res = client.Post(path, headers, items);
    if (!res) throw TransportError("VLM endpoint unreachable: " + config.endpoint);
    if (res->status != 200)
      throw TransportError("VLM endpoint returned status " + std::to_string(res->status));

    try {
      return validate_caption(extract_payload(res->body));
    } catch (const ValidationError& e) {
      last_error = e.what();
    }
  }
  throw CaptionUnavailableError("caption validation failed after " +
                                std::to_string(config.retries + 1) + " attempts: " + last_error);
}

}  // namespace drivegen
