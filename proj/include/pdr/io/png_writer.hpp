// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>

namespace pdr::io {

/// Writes an H x W x 3 image with values in [0,1] as 8-bit RGB PNG.
/// Values outside [0,1] are clamped.
void write_png(const std::filesystem::path& path, std::int64_t height, std::int64_t width,
               std::span<const float> rgb);
void write_png(const std::filesystem::path& path, std::int64_t height, std::int64_t width,
               std::span<const double> rgb);

}  // namespace pdr::io
