// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "pdr/ad/tensor.hpp"

namespace pdr {

/// Closed ranges of every scene parameter. Decoders squash into these and
/// perturbations are clamped back into them.
struct ParamRanges {
  double standoff = 1.0;      // d0
  double depth_band = 0.1;    // depth in [d0 (1 - band), d0 (1 + band)]
  double max_light_angle = 90.0;
  double max_camera_rotation = 60.0;
  double max_camera_translation = 0.3;

  double depth_min() const { return standoff * (1.0 - depth_band); }
  double depth_max() const { return standoff * (1.0 + depth_band); }
  /// [lo, hi] of light component i (k_ambient, k_diffuse, pitch, yaw).
  std::array<double, 2> light_bounds(int i) const;
  /// [lo, hi] of camera component i (rx, ry, rz in degrees, tx, ty, tz).
  std::array<double, 2> camera_bounds(int i) const;
};

/// Explicit scene description, batched along the leading axis.
///   depth  [N,H,W]   geometry, strictly positive
///   albedo [N,H,W,3] in [0,1]
///   light  [N,4]     (k_ambient, k_diffuse, pitch deg, yaw deg)
///   camera [N,6]     (rx, ry, rz deg, tx, ty, tz)
template <typename T>
struct SceneParams {
  ad::Tensor<T> depth;
  ad::Tensor<T> albedo;
  ad::Tensor<T> light;
  ad::Tensor<T> camera;

  std::int64_t batch() const { return depth.dim(0); }
  std::int64_t height() const { return depth.dim(1); }
  std::int64_t width() const { return depth.dim(2); }

  /// Row `i` as a batch of one (detached copies).
  SceneParams row(std::int64_t i) const;
  SceneParams detached() const;
};

/// Throws std::invalid_argument describing the first shape or range
/// violation. `tolerance` widens every range.
template <typename T>
void validate(const SceneParams<T>& params, const ParamRanges& ranges, double tolerance = 0.0);

/// Stacks batches along the leading axis.
template <typename T>
SceneParams<T> stack(const std::vector<SceneParams<T>>& parts);

extern template struct SceneParams<float>;
extern template struct SceneParams<double>;

}  // namespace pdr
