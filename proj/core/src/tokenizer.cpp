// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#include "drivegen/tokenizer.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>

#include "drivegen/scene.hpp"

namespace drivegen {

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) != 0; }

// Grammar words beyond the enum vocabularies.
const char* kGrammarWords[] = {
    "a",    "an",     "the",   "is",     "are",   "about", "meters", "meter",  "away",
    "in",   "center", "on",    "left",   "right", "view",  "shows",  "open",   "road",
    "no",   "none",   "and",   "nearby", "area",  "with",  "this",   "visible", "space",
    "traffic", "clear", "lane", "junction", "cross", "turn", "split", "merging", "straight",
    "roundabout", "t", "y"};

}  // namespace

Tokenizer::Tokenizer() {
  std::vector<std::string> words;
  auto add_text = [&](const std::string& text) {
    for (auto& piece : split(text)) words.push_back(piece);
  };
  for (int i = 0; i < kNumCategories; ++i) {
    add_text(to_string(static_cast<Category>(i)));
    add_text(to_string(static_cast<Category>(i)) + "s");  // plural forms
  }
  add_text("buses");
  for (int i = 0; i < 5; ++i) add_text(to_string(static_cast<TimeOfDay>(i)));
  for (int i = 0; i < 10; ++i) add_text(to_string(static_cast<Weather>(i)));
  for (int i = 0; i < 7; ++i) add_text(to_string(static_cast<Surroundings>(i)));
  for (int i = 0; i < 10; ++i) add_text(to_string(static_cast<RoadTopology>(i)));
  for (const char* w : kGrammarWords) words.push_back(w);
  const char* punct[] = {",", ";", ".", "-", "'", ":", "(", ")"};
  for (const char* p : punct) words.push_back(p);

  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  vocab_ = std::move(words);
}

std::vector<std::string> Tokenizer::split(const std::string& text) {
  std::vector<std::string> pieces;
  std::string current;
  auto flush = [&]() {
    if (!current.empty()) {
      pieces.push_back(current);
      current.clear();
    }
  };
  for (unsigned char c : text) {
    if (is_word_char(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
      if (!std::isspace(c)) pieces.push_back(std::string(1, static_cast<char>(c)));
    }
  }
  flush();
  return pieces;
}

std::string Tokenizer::join(const std::vector<std::string>& pieces) {
  std::string out;
  for (const auto& p : pieces) {
    bool punct = p.size() == 1 && !is_word_char(static_cast<unsigned char>(p[0]));
    if (!out.empty() && !punct) out.push_back(' ');
    out += p;
  }
  return out;
}

std::vector<int32_t> Tokenizer::ids_of_piece(const std::string& piece) const {
  auto it = std::lower_bound(vocab_.begin(), vocab_.end(), piece);
  if (it != vocab_.end() && *it == piece) {
    return {static_cast<int32_t>(257 + (it - vocab_.begin()))};
  }
  // Byte fallback: unknown pieces map to per-byte ids, never fail.
  std::vector<int32_t> ids;
  ids.reserve(piece.size());
  for (unsigned char c : piece) ids.push_back(1 + static_cast<int32_t>(c));
  return ids;
}

std::vector<int32_t> Tokenizer::encode(const std::string& text) const {
  std::vector<int32_t> out;
  for (const auto& piece : split(text)) {
    auto ids = ids_of_piece(piece);
    out.insert(out.end(), ids.begin(), ids.end());
  }
  return out;
}

int Tokenizer::count(const std::string& text) const {
  return static_cast<int>(encode(text).size());
}

}  // namespace drivegen
