// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace drivegen {

struct Rgb {
  uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

// Dense 8-bit RGB image, row-major.
class Image {
public:
  Image() = default;
  Image(int height, int width, Rgb fill = {0, 0, 0})
      : h_(height), w_(width), data_(static_cast<size_t>(height) * width, fill) {}

  int height() const { return h_; }
  int width() const { return w_; }
  Rgb& at(int y, int x) { return data_[static_cast<size_t>(y) * w_ + x]; }
  const Rgb& at(int y, int x) const { return data_[static_cast<size_t>(y) * w_ + x]; }
  const std::vector<Rgb>& pixels() const { return data_; }
  std::vector<Rgb>& pixels() { return data_; }
  bool operator==(const Image&) const = default;

private:
  int h_ = 0;
  int w_ = 0;
  std::vector<Rgb> data_;
};

// Single-channel 8-bit image (masks, label maps).
class GrayImage {
public:
  GrayImage() = default;
  GrayImage(int height, int width, uint8_t fill = 0)
      : h_(height), w_(width), data_(static_cast<size_t>(height) * width, fill) {}

  int height() const { return h_; }
  int width() const { return w_; }
  uint8_t& at(int y, int x) { return data_[static_cast<size_t>(y) * w_ + x]; }
  uint8_t at(int y, int x) const { return data_[static_cast<size_t>(y) * w_ + x]; }
  const std::vector<uint8_t>& pixels() const { return data_; }
  std::vector<uint8_t>& pixels() { return data_; }
  bool operator==(const GrayImage&) const = default;

private:
  int h_ = 0;
  int w_ = 0;
  std::vector<uint8_t> data_;
};

void write_png(const std::filesystem::path& path, const Image& img);
void write_png(const std::filesystem::path& path, const GrayImage& img);
Image read_png(const std::filesystem::path& path);
GrayImage read_png_gray(const std::filesystem::path& path);

}  // namespace drivegen
