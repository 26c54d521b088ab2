// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

// Procedural scenes with known shape and albedo classes.

#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "pdr/render/renderer.hpp"
#include "pdr/rng.hpp"
#include "pdr/scene/scene.hpp"

namespace pdr::scene {

inline constexpr std::array<std::string_view, 5> kShapeNames{"dome", "ridge", "pyramid", "saddle", "twin-bump"};
inline constexpr std::array<std::string_view, 4> kAlbedoNames{"flat", "stripes", "checker", "radial"};

struct GeneratorConfig {
  std::int64_t image_size = 64;
  int num_shape_classes = 5;   // at most kShapeNames.size()
  int num_albedo_classes = 4;  // at most kAlbedoNames.size()
  ParamRanges ranges{};
  render::RenderConfig render{};
  double fov_degrees = 30.0;
  // Light = canonical + U(-delta, delta), clamped into range.
  std::array<double, 4> canonical_light{0.5, 0.5, 0.0, 0.0};
  std::array<double, 4> light_delta{0.5, 0.5, 45.0, 45.0};
  // Camera rotation about x and y; the rest of the pose stays frontal.
  double camera_pitch_delta = 22.5;
  double camera_yaw_delta = 45.0;

  void check() const;
};

template <typename T>
struct LabeledScene {
  ad::Tensor<T> image;  // [1,H,W,3]
  SceneParams<T> params;  // batch of one
  int shape_class = 0;
  int albedo_class = 0;
  std::uint64_t seed = 0;
};

/// Deterministic in (seed, classes, cfg). Throws std::invalid_argument when a
/// class index is out of range.
template <typename T>
LabeledScene<T> generate_scene(std::uint64_t seed, int shape_class, int albedo_class, const GeneratorConfig& cfg);

/// Smooth height field of the given class in [0,1], [H*W] row-major.
std::vector<double> shape_template(int shape_class, std::int64_t size, Rng& rng);
/// Albedo texture [H*W*3] of the given class.
std::vector<double> albedo_pattern(int albedo_class, std::int64_t size, Rng& rng);

}  // namespace pdr::scene
