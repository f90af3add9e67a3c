// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#include "drivegen/rng.hpp"

#include <cmath>

namespace drivegen {

namespace {

inline uint64_t splitmix64(uint64_t& x) {
  x += 0x9e3779b97f4a7c15ull;
  uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(uint64_t seed) {
  uint64_t x = seed;
  for (auto& s : s_) s = splitmix64(x);
  // xoshiro must not start from the all-zero state.
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 0x9e3779b97f4a7c15ull;
}

uint64_t Rng::next_u64() {
  uint64_t result = rotl(s_[1] * 5, 7) * 9;
  uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int64_t Rng::uniform_int(int64_t lo, int64_t hi) {
  uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
  // Multiply-shift bounded draw; bias is < 2^-64 and irrelevant here.
  uint64_t r = next_u64();
  unsigned __int128 m = static_cast<unsigned __int128>(r) * span;
  return lo + static_cast<int64_t>(m >> 64);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

bool Rng::bernoulli(double p) { return uniform() < p; }

void Rng::fill_normal(float* dst, size_t n) {
  for (size_t i = 0; i < n; ++i) dst[i] = static_cast<float>(normal());
}

void Rng::fill_normal(double* dst, size_t n) {
  for (size_t i = 0; i < n; ++i) dst[i] = normal();
}

uint64_t fnv1a(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

uint64_t mix_seed(uint64_t seed, std::string_view name) {
  uint64_t x = seed ^ fnv1a(name);
  return splitmix64(x);
}

uint64_t mix_seed(uint64_t seed, std::string_view name, uint64_t index) {
  uint64_t x = mix_seed(seed, name) ^ (0x9e3779b97f4a7c15ull + index);
  return splitmix64(x);
}

Rng substream(uint64_t seed, std::string_view name) { return Rng(mix_seed(seed, name)); }

Rng substream(uint64_t seed, std::string_view name, uint64_t index) {
  return Rng(mix_seed(seed, name, index));
}

}  // namespace drivegen
