// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

// Differentiable depth-map renderer: Lambertian shading in the canonical
// frame, then soft point splatting into the target camera.

#pragma once

#include <array>
#include <cstdint>

#include "pdr/ad/tensor.hpp"
#include "pdr/scene/scene.hpp"

namespace pdr::render {

/// Pinhole intrinsics shared by the canonical and target views. Pixel
/// centres sit at integer coordinates; the principal point is the image
/// centre ((size-1)/2).
struct CameraIntrinsics {
  std::int64_t size = 64;
  double focal = 0.0;  // pixels
  double center = 0.0;

  static CameraIntrinsics from_fov(std::int64_t size, double fov_degrees = 30.0);
};

struct RenderConfig {
  double splat_sigma = 0.02;    // visibility temperature, scene units
  double coverage_eps = 1e-3;   // weight below which background shows through
  double background = 0.5;
  double standoff = 1.0;        // rotation pivot depth; also fixes the normal scale
};

/// Unit normals [N,H,W,3] of a depth map [N,H,W]:
/// normalize(-s dd/du, -s dd/dv, 1) with central differences inside and
/// one-sided differences on the border. `gradient_scale` s converts pixel
/// steps to scene units (1 = unit pixel spacing).
template <typename T>
ad::Tensor<T> normals_from_depth(const ad::Tensor<T>& depth, T gradient_scale = T(1));

/// (cos p sin y, sin p, cos p cos y) for angles in degrees.
std::array<double, 3> light_direction(double pitch_deg, double yaw_deg);

/// Batched light_direction from light [N,4]; returns [N,3].
template <typename T>
ad::Tensor<T> light_direction(const ad::Tensor<T>& light);

/// albedo * clamp(k_amb + k_diff * max(0, n.l), 0, 1).
template <typename T>
ad::Tensor<T> shade(const ad::Tensor<T>& albedo, const ad::Tensor<T>& normals, const ad::Tensor<T>& light);

/// Row-major Rz * Ry * Rx for angles in degrees.
std::array<double, 9> rotation_matrix(double rx_deg, double ry_deg, double rz_deg);

/// Moves the canonical view into the camera given by `camera` [N,6].
///
/// Every canonical pixel is lifted to p = d K^-1 (u, v, 1), rotated about the
/// pivot (0, 0, standoff) and translated, then projected. Its colour is
/// splatted onto the four nearest target pixels with bilinear weights times
/// the visibility weight exp(-(z' - z_ref)/sigma), where z_ref is the
/// coverage-weighted mean depth landing on that target pixel. A target pixel
/// takes (sum w c + eps bg) / (sum w + eps), so it falls back to the
/// background colour where coverage is far below eps.
template <typename T>
ad::Tensor<T> reproject(const ad::Tensor<T>& canonical, const ad::Tensor<T>& depth, const ad::Tensor<T>& camera,
                        const CameraIntrinsics& intr, const RenderConfig& cfg);

/// reproject(shade(albedo, normals_from_depth(depth), light), depth, camera).
template <typename T>
ad::Tensor<T> render(const SceneParams<T>& params, const CameraIntrinsics& intr, const RenderConfig& cfg);

/// Convenience holder for intrinsics + config.
struct Renderer {
  CameraIntrinsics intrinsics;
  RenderConfig config;

  template <typename T>
  ad::Tensor<T> operator()(const SceneParams<T>& params) const {
    return render(params, intrinsics, config);
  }
};

}  // namespace pdr::render
