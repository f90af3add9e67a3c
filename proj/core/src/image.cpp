// Copyright (C) 2026 drivegen authors
// SPDX-License-Identifier: Apache-2.0
#include "drivegen/image.hpp"

#include <png.h>

#include <cstdio>
#include <memory>

#include "drivegen/errors.hpp"

namespace drivegen {

namespace {

struct FileCloser {
  void operator()(FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

void write_png_impl(const std::filesystem::path& path, int h, int w, int channels,
                    const uint8_t* data) {
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw DataError("cannot open for writing: " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw DataError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw DataError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("png write error: " + path.string());
  }
  png_init_io(png, fp.get());
  int color = channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
  png_set_IHDR(png, info, w, h, 8, color, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y)
    rows[y] = const_cast<png_bytep>(data + static_cast<size_t>(y) * w * channels);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void read_png_impl(const std::filesystem::path& path, int& h, int& w, int want_channels,
                   std::vector<uint8_t>& out) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw DataError("cannot open for reading: " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw DataError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw DataError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("png read error: " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  png_set_strip_16(png);
  png_set_packing(png);
  png_set_strip_alpha(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (want_channels == 3) {
    png_set_gray_to_rgb(png);
  } else {
    png_set_rgb_to_gray_fixed(png, 1, -1, -1);
  }
  png_read_update_info(png, info);

  h = static_cast<int>(png_get_image_height(png, info));
  w = static_cast<int>(png_get_image_width(png, info));
  out.resize(static_cast<size_t>(h) * w * want_channels);
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y) rows[y] = out.data() + static_cast<size_t>(y) * w * want_channels;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
}

}  // namespace

void write_png(const std::filesystem::path& path, const Image& img) {
  write_png_impl(path, img.height(), img.width(), 3,
                 reinterpret_cast<const uint8_t*>(img.pixels().data()));
}

void write_png(const std::filesystem::path& path, const GrayImage& img) {
  write_png_impl(path, img.height(), img.width(), 1, img.pixels().data());
}

Image read_png(const std::filesystem::path& path) {
  int h = 0, w = 0;
  std::vector<uint8_t> buf;
  read_png_impl(path, h, w, 3, buf);
  Image img(h, w);
  for (size_t i = 0; i < static_cast<size_t>(h) * w; ++i) {
    img.pixels()[i] = {buf[i * 3], buf[i * 3 + 1], buf[i * 3 + 2]};
  }
  return img;
}

GrayImage read_png_gray(const std::filesystem::path& path) {
  int h = 0, w = 0;
  std::vector<uint8_t> buf;
  read_png_impl(path, h, w, 1, buf);
  GrayImage img(h, w);
  img.pixels() = std::move(buf);
  return img;
}

}  // namespace drivegen
