// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pdr/io/png_writer.hpp"

#include <png.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdr::io {
namespace {

template <typename T>
void write_rgb(const std::filesystem::path& path, std::int64_t height, std::int64_t width, std::span<const T> rgb) {
  if (height <= 0 || width <= 0 || static_cast<std::int64_t>(rgb.size()) != height * width * 3) {
    throw std::invalid_argument("write_png: buffer does not hold an HxWx3 image");
  }
  std::vector<png_byte> bytes(rgb.size());
  for (size_t i = 0; i < rgb.size(); ++i) {
    const double v = std::clamp(static_cast<double>(rgb[i]), 0.0, 1.0);
    bytes[i] = static_cast<png_byte>(std::lround(v * 255.0));
  }

  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!fp) throw std::runtime_error("cannot open " + path.string() + " for writing: " + std::strerror(errno));
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng failed while writing " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::int64_t y = 0; y < height; ++y) png_write_row(png, bytes.data() + y * width * 3);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

void write_png(const std::filesystem::path& path, std::int64_t height, std::int64_t width,
               std::span<const float> rgb) {
  write_rgb(path, height, width, rgb);
}

void write_png(const std::filesystem::path& path, std::int64_t height, std::int64_t width,
               std::span<const double> rgb) {
  write_rgb(path, height, width, rgb);
}

}  // namespace pdr::io
