// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace drivegen {

// Deterministic, platform-independent random streams. All randomness in the
// pipeline flows from one root seed through named substreams so that
// components (world, init, noise, sampler, data) can be varied independently
// and any step can be regenerated without replaying history.
//
// Stream derivation: fnv1a over the stream name mixed with splitmix64;
// generation: xoshiro256**. Floating-point draws are built from the raw bits
// (never std::uniform_*_distribution, which is implementation-defined).
class Rng {
public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();
  // Uniform in [0, 1) with 53 bits of mantissa.
  double uniform();
  // Uniform in [lo, hi).
  double uniform(double lo, double hi);
  // Integer uniform in [lo, hi] inclusive.
  int64_t uniform_int(int64_t lo, int64_t hi);
  // Standard normal via Box-Muller (pairs cached).
  double normal();
  // True with probability p.
  bool bernoulli(double p);
  // Pick an index weighted by projected probabilities (uniform here).
  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[static_cast<size_t>(uniform_int(0, static_cast<int64_t>(items.size()) - 1))];
  }

  void fill_normal(float* dst, size_t n);
  void fill_normal(double* dst, size_t n);

  // In-place Fisher-Yates with draws from this stream.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(0, static_cast<int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

private:
  uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

uint64_t mix_seed(uint64_t seed, std::string_view name);
uint64_t mix_seed(uint64_t seed, std::string_view name, uint64_t index);

// Substream rooted at (seed, name[, index]).
Rng substream(uint64_t seed, std::string_view name);
Rng substream(uint64_t seed, std::string_view name, uint64_t index);

// FNV-1a over bytes; also used for content hashes of canonical JSON.
uint64_t fnv1a(std::string_view bytes);

}  // namespace drivegen
