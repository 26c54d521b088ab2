// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

// PDRT tensor container.
//
//   offset 0  : magic "PDRT"
//   offset 4  : u8 dtype (0 = f32, 1 = f64)
//   offset 5  : u8 ndim
//   offset 6  : two zero bytes (header padded to 8)
//   offset 8  : ndim x u32 little-endian dims
//   then      : row-major little-endian payload

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pdr/ad/tensor.hpp"

namespace pdr::io {

enum class DType : std::uint8_t { f32 = 0, f64 = 1 };

template <typename T>
constexpr DType dtype_of();
template <>
constexpr DType dtype_of<float>() { return DType::f32; }
template <>
constexpr DType dtype_of<double>() { return DType::f64; }

struct PdrtTensor {
  ad::Shape shape;
  std::variant<std::vector<float>, std::vector<double>> values;

  DType dtype() const { return values.index() == 0 ? DType::f32 : DType::f64; }
  /// Values converted to T (exact when widening).
  template <typename T>
  std::vector<T> as() const;
};

std::vector<std::uint8_t> encode_pdrt(const ad::Shape& shape, std::span<const float> values);
std::vector<std::uint8_t> encode_pdrt(const ad::Shape& shape, std::span<const double> values);
PdrtTensor decode_pdrt(std::span<const std::uint8_t> bytes);

/// Throws std::runtime_error naming the path and the cause on I/O failure.
void write_pdrt(const std::filesystem::path& path, const ad::Shape& shape, std::span<const float> values);
void write_pdrt(const std::filesystem::path& path, const ad::Shape& shape, std::span<const double> values);
PdrtTensor read_pdrt(const std::filesystem::path& path);

template <typename T>
void save_tensor(const std::filesystem::path& path, const ad::Tensor<T>& t) {
  write_pdrt(path, t.shape(), t.data());
}

template <typename T>
ad::Tensor<T> load_tensor(const std::filesystem::path& path) {
  auto raw = read_pdrt(path);
  return ad::Tensor<T>::from(raw.shape, raw.as<T>());
}

// Whole-file helpers shared by the dataset and checkpoint writers.
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace pdr::io
