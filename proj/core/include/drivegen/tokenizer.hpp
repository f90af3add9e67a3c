// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace drivegen {

// Pluggable token counter; the 77-token budget is enforced under whichever
// counter is configured. Swapping in a CLIP-compatible counter changes only
// truncation points.
class TokenCounter {
public:
  virtual ~TokenCounter() = default;
  virtual int count(const std::string& text) const = 0;
};

// Default tokenizer: lowercased words and punctuation pieces over the caption
// grammar vocabulary, with per-byte fallback for anything out of vocabulary.
// Token ids: 0 = PAD, 1..256 = bytes, 257.. = vocabulary pieces. Counts are
// measured in ids (after byte fallback), which is exactly the sequence length
// the text encoder consumes.
class Tokenizer : public TokenCounter {
public:
  Tokenizer();

  static constexpr int32_t kPadId = 0;

  // Word/punctuation split; words lowercased, punctuation kept as pieces.
  static std::vector<std::string> split(const std::string& text);
  // Joins pieces back into normalized text (no space before punctuation).
  static std::string join(const std::vector<std::string>& pieces);

  std::vector<int32_t> encode(const std::string& text) const;
  int count(const std::string& text) const override;
  int vocab_size() const { return static_cast<int>(vocab_.size()) + 257; }

private:
  std::vector<std::string> vocab_;  // pieces at id 257 + index
  std::vector<int32_t> ids_of_piece(const std::string& piece) const;
};

}  // namespace drivegen
