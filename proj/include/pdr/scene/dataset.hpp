// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

// Labeled scene collections with a stratified train/val/test split.
//
// On disk:
//   manifest.json            version, generator echo, split fractions, entries
//   examples/NNNNNN_<field>.pdrt   image, depth, albedo, light, camera (f32)

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pdr/io/json_util.hpp"
#include "pdr/scene/generator.hpp"

namespace pdr::scene {

enum class Split : int { train = 0, val = 1, test = 2 };

std::string_view split_name(Split s);
Split parse_split(std::string_view name);

struct SplitFractions {
  double train = 0.8, val = 0.1, test = 0.1;
  void check() const;
};

struct DatasetEntry {
  std::uint64_t seed = 0;
  int shape_class = 0;
  int albedo_class = 0;
  Split split = Split::train;
};

struct Dataset {
  GeneratorConfig generator;
  SplitFractions fractions;
  std::uint64_t seed = 0;
  std::vector<DatasetEntry> entries;
  std::vector<LabeledScene<float>> scenes;  // parallel to entries

  std::size_t size() const { return entries.size(); }
  std::vector<std::size_t> indices(Split s) const;
  ad::Tensor<float> images(std::span<const std::size_t> idx) const;  // [K,H,W,3]
  SceneParams<float> params(std::span<const std::size_t> idx) const;
  std::vector<int> shape_labels(std::span<const std::size_t> idx) const;
  std::vector<int> albedo_labels(std::span<const std::size_t> idx) const;
};

/// Split sizes round(n f_train), round(n f_val), rest. Within every label the
/// per-split counts are within one of n_label * f_split, and members are
/// shuffled by `rng` before assignment.
std::vector<Split> stratified_split(std::span<const int> labels, int num_labels, const SplitFractions& fractions,
                                    Rng& rng);

/// n scenes with uniformly drawn classes; example i uses seed mix_seed(seed, i).
Dataset build_dataset(std::int64_t n, const SplitFractions& fractions, std::uint64_t seed, const GeneratorConfig& cfg);

/// Creates `dir` if needed. Errors name the failing path and cause.
void save_dataset(const std::filesystem::path& dir, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& dir);

void to_json(io::Json& j, const GeneratorConfig& c);
void from_json(const io::Json& j, GeneratorConfig& c);
void to_json(io::Json& j, const SplitFractions& f);
void from_json(const io::Json& j, SplitFractions& f);

}  // namespace pdr::scene

namespace pdr {
void to_json(io::Json& j, const ParamRanges& r);
void from_json(const io::Json& j, ParamRanges& r);
}  // namespace pdr

namespace pdr::render {
void to_json(io::Json& j, const RenderConfig& c);
void from_json(const io::Json& j, RenderConfig& c);
}  // namespace pdr::render
