// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pdr/io/pdrt.hpp"

#include <bit>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pdr::io {

static_assert(std::endian::native == std::endian::little, "PDRT I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'P', 'D', 'R', 'T'};
constexpr size_t kHeader = 8;

template <typename T>
std::vector<std::uint8_t> encode(const ad::Shape& shape, std::span<const T> values) {
  if (shape.size() > 255) throw std::invalid_argument("PDRT: too many dimensions");
  std::int64_t n = 1;
  for (auto d : shape) {
    if (d <= 0 || d > 0xFFFFFFFFll) throw std::invalid_argument("PDRT: invalid dim in " + ad::shape_str(shape));
    n *= d;
  }
  if (n != static_cast<std::int64_t>(values.size())) {
    throw std::invalid_argument("PDRT: shape " + ad::shape_str(shape) + " does not match payload size");
  }
  std::vector<std::uint8_t> out(kHeader + 4 * shape.size() + sizeof(T) * values.size(), 0);
  std::memcpy(out.data(), kMagic, 4);
  out[4] = static_cast<std::uint8_t>(dtype_of<T>());
  out[5] = static_cast<std::uint8_t>(shape.size());
  for (size_t i = 0; i < shape.size(); ++i) {
    const auto d = static_cast<std::uint32_t>(shape[i]);
    std::memcpy(out.data() + kHeader + 4 * i, &d, 4);
  }
  if (!values.empty()) std::memcpy(out.data() + kHeader + 4 * shape.size(), values.data(), sizeof(T) * values.size());
  return out;
}

std::string errno_text() { return std::strerror(errno); }

}  // namespace

template <typename T>
std::vector<T> PdrtTensor::as() const {
  return std::visit([](const auto& v) { return std::vector<T>(v.begin(), v.end()); }, values);
}

template std::vector<float> PdrtTensor::as<float>() const;
template std::vector<double> PdrtTensor::as<double>() const;

std::vector<std::uint8_t> encode_pdrt(const ad::Shape& shape, std::span<const float> values) {
  return encode(shape, values);
}

std::vector<std::uint8_t> encode_pdrt(const ad::Shape& shape, std::span<const double> values) {
  return encode(shape, values);
}

PdrtTensor decode_pdrt(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeader || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw std::runtime_error("PDRT: bad magic");
  }
  const auto dtype = bytes[4];
  const auto ndim = bytes[5];
  if (dtype > 1) throw std::runtime_error("PDRT: unknown dtype code " + std::to_string(dtype));
  if (bytes.size() < kHeader + 4u * ndim) throw std::runtime_error("PDRT: truncated header");
  PdrtTensor t;
  std::int64_t n = 1;
  for (size_t i = 0; i < ndim; ++i) {
    std::uint32_t d = 0;
    std::memcpy(&d, bytes.data() + kHeader + 4 * i, 4);
    if (d == 0) throw std::runtime_error("PDRT: zero dimension");
    t.shape.push_back(d);
    n *= d;
  }
  const size_t offset = kHeader + 4u * ndim;
  const size_t elem = dtype == 0 ? 4 : 8;
  if (bytes.size() != offset + elem * static_cast<size_t>(n)) {
    throw std::runtime_error("PDRT: payload size mismatch for shape " + ad::shape_str(t.shape));
  }
  if (dtype == 0) {
    std::vector<float> v(static_cast<size_t>(n));
    std::memcpy(v.data(), bytes.data() + offset, elem * v.size());
    t.values = std::move(v);
  } else {
    std::vector<double> v(static_cast<size_t>(n));
    std::memcpy(v.data(), bytes.data() + offset, elem * v.size());
    t.values = std::move(v);
  }
  return t;
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing: " + errno_text());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string() + ": " + errno_text());
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string() + ": " + errno_text());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string read_text(const std::filesystem::path& path) {
  auto bytes = read_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void write_pdrt(const std::filesystem::path& path, const ad::Shape& shape, std::span<const float> values) {
  write_bytes(path, encode_pdrt(shape, values));
}

void write_pdrt(const std::filesystem::path& path, const ad::Shape& shape, std::span<const double> values) {
  write_bytes(path, encode_pdrt(shape, values));
}

PdrtTensor read_pdrt(const std::filesystem::path& path) {
  try {
    return decode_pdrt(read_bytes(path));
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    if (what.rfind("PDRT", 0) == 0) throw std::runtime_error(path.string() + ": " + what);
    throw;
  }
}

}  // namespace pdr::io
