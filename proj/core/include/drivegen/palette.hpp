// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "drivegen/image.hpp"
#include "drivegen/scene.hpp"

namespace drivegen {

// Semantic classes answered by the oracle and the pixel classifier.
enum class SemanticClass : uint8_t { kBackground = 0, kRoad = 1, kVehicle = 2, kOtherObject = 3 };

// Fixed flat-shading palette. Class colors are chosen well-separated across
// semantic classes so nearest-palette classification survives texture noise.
namespace palette {

inline constexpr Rgb kSky{148, 196, 232};
inline constexpr Rgb kTerrain{78, 116, 72};
inline constexpr Rgb kDrivable{95, 95, 102};
inline constexpr Rgb kLane{235, 235, 235};
inline constexpr Rgb kCrossing{205, 185, 90};

// Indexed by Category.
inline constexpr std::array<Rgb, kNumCategories> kCategory = {{
    {200, 45, 45},    // car
    {235, 145, 40},   // bus
    {140, 85, 200},   // truck
    {85, 50, 170},    // trailer
    {45, 200, 200},   // motorcycle
    {70, 220, 90},    // bicycle
    {150, 150, 40},   // construction vehicle
    {250, 120, 170},  // pedestrian
    {120, 40, 40},    // barrier
    {250, 230, 30},   // traffic cone
}};

// Condition-image colors: map classes and box categories on black background.
inline constexpr Rgb kCondDrivable{40, 60, 230};
inline constexpr Rgb kCondLane{40, 230, 60};
inline constexpr Rgb kCondCrossing{230, 40, 60};
inline constexpr std::array<Rgb, kNumCategories> kCondCategory = kCategory;

}  // namespace palette

inline SemanticClass category_class(Category c) {
  switch (c) {
    case Category::kPedestrian:
    case Category::kBarrier:
    case Category::kTrafficCone:
      return SemanticClass::kOtherObject;
    default:
      return SemanticClass::kVehicle;
  }
}

// Global deterministic tint: a per-time brightness gain and a per-weather
// (gain, saturation) pair, applied multiplicatively around per-pixel
// luminance. All factors are <= 1 so the transform stays invertible on
// 8-bit data up to rounding.
struct TintFactors {
  double gain = 1.0;
  double saturation = 1.0;
};

inline TintFactors tint_factors(const SceneAttrs& attrs) {
  static constexpr double kTimeGain[5] = {1.0, 0.35, 0.62, 0.72, 0.55};
  static constexpr double kWeatherGain[10] = {1.0, 1.0, 0.85, 0.9, 0.8,
                                              0.78, 0.85, 0.95, 0.85, 0.6};
  static constexpr double kWeatherSat[10] = {1.0, 1.0, 0.7, 0.8, 0.35,
                                             0.55, 0.65, 0.3, 0.5, 0.6};
  TintFactors f;
  f.gain = kTimeGain[static_cast<int>(attrs.time)] * kWeatherGain[static_cast<int>(attrs.weather)];
  f.saturation = kWeatherSat[static_cast<int>(attrs.weather)];
  return f;
}

inline double luminance(double r, double g, double b) {
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

inline Rgb apply_tint(Rgb c, const TintFactors& f) {
  double lum = luminance(c.r, c.g, c.b);
  auto mix = [&](double v) {
    double out = f.gain * (lum + f.saturation * (v - lum));
    return static_cast<uint8_t>(std::clamp(std::lround(out), 0l, 255l));
  };
  return {mix(c.r), mix(c.g), mix(c.b)};
}

// Approximate inverse of apply_tint (exact up to 8-bit rounding).
inline Rgb invert_tint(Rgb c, const TintFactors& f) {
  double lum_tinted = luminance(c.r, c.g, c.b);
  double lum = lum_tinted / f.gain;
  auto unmix = [&](double v) {
    double out = lum + (v / f.gain - lum) / f.saturation;
    return static_cast<uint8_t>(std::clamp(std::lround(out), 0l, 255l));
  };
  return {unmix(c.r), unmix(c.g), unmix(c.b)};
}

}  // namespace drivegen
