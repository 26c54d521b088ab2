// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pdr/render/renderer.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "pdr/ad/ops.hpp"

namespace pdr::render {

using ad::Tensor;

namespace {

constexpr double kDegToRad = M_PI / 180.0;
// Points this close to (or behind) the camera plane are dropped.
constexpr double kNearPlane = 0.05;

template <typename T>
Tensor<T> column(const Tensor<T>& x, std::int64_t j) {
  return ad::slice(x, 1, j, 1);  // [N,1]
}

}  // namespace

CameraIntrinsics CameraIntrinsics::from_fov(std::int64_t size, double fov_degrees) {
  if (size <= 0) throw std::invalid_argument("image size must be positive");
  if (!(fov_degrees > 0.0 && fov_degrees < 180.0)) throw std::invalid_argument("field of view must be in (0, 180)");
  CameraIntrinsics k;
  k.size = size;
  k.focal = 0.5 * static_cast<double>(size) / std::tan(0.5 * fov_degrees * kDegToRad);
  k.center = 0.5 * static_cast<double>(size - 1);
  return k;
}

template <typename T>
Tensor<T> normals_from_depth(const Tensor<T>& depth, T gradient_scale) {
  if (depth.rank() != 3) throw std::invalid_argument("normals_from_depth: depth must be [N,H,W]");
  const auto n = depth.dim(0), h = depth.dim(1), w = depth.dim(2);
  auto du = ad::reshape(ad::finite_difference(depth, 2), {n, h, w, 1});
  auto dv = ad::reshape(ad::finite_difference(depth, 1), {n, h, w, 1});
  auto ones = Tensor<T>::full({n, h, w, 1}, T(1));
  auto raw = ad::concat<T>({ad::scale(du, -gradient_scale), ad::scale(dv, -gradient_scale), ones}, 3);
  return ad::l2_normalize(raw);
}

std::array<double, 3> light_direction(double pitch_deg, double yaw_deg) {
  const double p = pitch_deg * kDegToRad, y = yaw_deg * kDegToRad;
  return {std::cos(p) * std::sin(y), std::sin(p), std::cos(p) * std::cos(y)};
}

template <typename T>
Tensor<T> light_direction(const Tensor<T>& light) {
  if (light.rank() != 2 || light.dim(1) != 4) throw std::invalid_argument("light must be [N,4]");
  const T to_rad = static_cast<T>(kDegToRad);
  auto pitch = ad::scale(column(light, 2), to_rad);
  auto yaw = ad::scale(column(light, 3), to_rad);
  auto cp = ad::cos(pitch);
  return ad::concat<T>({cp * ad::sin(yaw), ad::sin(pitch), cp * ad::cos(yaw)}, 1);
}

template <typename T>
Tensor<T> shade(const Tensor<T>& albedo, const Tensor<T>& normals, const Tensor<T>& light) {
  if (albedo.rank() != 4 || normals.shape() != albedo.shape()) {
    throw std::invalid_argument("shade: albedo " + ad::shape_str(albedo.shape()) + " and normals " +
                                ad::shape_str(normals.shape()) + " must both be [N,H,W,3]");
  }
  const auto n = albedo.dim(0), h = albedo.dim(1), w = albedo.dim(2);
  if (light.shape() != ad::Shape{n, 4}) throw std::invalid_argument("shade: light must be [N,4]");
  auto l = ad::reshape(light_direction(light), {n, 1, 1, 3});
  auto ndotl = ad::sum(normals * l, 3);  // [N,H,W]
  auto k_amb = ad::reshape(column(light, 0), {n, 1, 1});
  auto k_diff = ad::reshape(column(light, 1), {n, 1, 1});
  auto intensity = ad::clamp(k_amb + k_diff * ad::relu(ndotl), T(0), T(1));
  return albedo * ad::reshape(intensity, {n, h, w, 1});
}

std::array<double, 9> rotation_matrix(double rx_deg, double ry_deg, double rz_deg) {
  const double cx = std::cos(rx_deg * kDegToRad), sx = std::sin(rx_deg * kDegToRad);
  const double cy = std::cos(ry_deg * kDegToRad), sy = std::sin(ry_deg * kDegToRad);
  const double cz = std::cos(rz_deg * kDegToRad), sz = std::sin(rz_deg * kDegToRad);
  return {cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sz * sx,
          sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx,
          -sy,     cy * sx,                cy * cx};
}

template <typename T>
Tensor<T> reproject(const Tensor<T>& canonical, const Tensor<T>& depth, const Tensor<T>& camera,
                    const CameraIntrinsics& intr, const RenderConfig& cfg) {
  if (depth.rank() != 3) throw std::invalid_argument("reproject: depth must be [N,H,W]");
  const auto n = depth.dim(0), h = depth.dim(1), w = depth.dim(2);
  if (canonical.shape() != ad::Shape{n, h, w, 3}) {
    throw std::invalid_argument("reproject: image " + ad::shape_str(canonical.shape()) + " does not match depth " +
                                ad::shape_str(depth.shape()));
  }
  if (camera.shape() != ad::Shape{n, 6}) throw std::invalid_argument("reproject: camera must be [N,6]");
  if (h != intr.size || w != intr.size) {
    throw std::invalid_argument("reproject: image size " + std::to_string(h) + "x" + std::to_string(w) +
                                " does not match intrinsics size " + std::to_string(intr.size));
  }
  if (!(cfg.splat_sigma > 0.0) || !(cfg.coverage_eps > 0.0)) {
    throw std::invalid_argument("reproject: splat_sigma and coverage_eps must be positive");
  }
  const std::int64_t hw = h * w;
  const T f = static_cast<T>(intr.focal);
  const T c0 = static_cast<T>(intr.center);
  const T d0 = static_cast<T>(cfg.standoff);

  // Back-projection rays K^-1 (u, v, 1).
  std::vector<T> ray_x(static_cast<size_t>(hw)), ray_y(static_cast<size_t>(hw));
  for (std::int64_t v = 0; v < h; ++v)
    for (std::int64_t u = 0; u < w; ++u) {
      ray_x[v * w + u] = (static_cast<T>(u) - c0) / f;
      ray_y[v * w + u] = (static_cast<T>(v) - c0) / f;
    }
  auto d = ad::reshape(depth, {n, hw});
  auto px = d * Tensor<T>::from({1, hw}, ray_x);
  auto py = d * Tensor<T>::from({1, hw}, ray_y);
  auto pz = ad::add_scalar(d, -d0);

  // Rotation entries as [N,1] columns.
  const T to_rad = static_cast<T>(kDegToRad);
  auto ang = [&](std::int64_t j) { return ad::scale(column(camera, j), to_rad); };
  auto rx = ang(0), ry = ang(1), rz = ang(2);
  auto cx = ad::cos(rx), sx = ad::sin(rx);
  auto cy = ad::cos(ry), sy = ad::sin(ry);
  auto cz = ad::cos(rz), sz = ad::sin(rz);
  auto r00 = cz * cy, r01 = cz * sy * sx - sz * cx, r02 = cz * sy * cx + sz * sx;
  auto r10 = sz * cy, r11 = sz * sy * sx + cz * cx, r12 = sz * sy * cx - cz * sx;
  auto r20 = -sy, r21 = cy * sx, r22 = cy * cx;

  auto qx = r00 * px + r01 * py + r02 * pz + column(camera, 3);
  auto qy = r10 * px + r11 * py + r12 * pz + column(camera, 4);
  auto qz = ad::add_scalar(r20 * px + r21 * py + r22 * pz + column(camera, 5), d0);
  auto qz_safe = ad::clamp(qz, static_cast<T>(kNearPlane), std::numeric_limits<T>::max());
  auto u_t = ad::add_scalar(ad::scale(qx / qz_safe, f), c0);  // [N,HW]
  auto v_t = ad::add_scalar(ad::scale(qy / qz_safe, f), c0);

  // Integer splat footprint (constant w.r.t. the graph).
  const auto uv = u_t.data();
  const auto vv = v_t.data();
  const auto zv = qz.data();
  std::vector<T> u_floor(uv.size()), v_floor(vv.size());
  std::vector<std::int64_t> target(static_cast<size_t>(n * hw * 4), -1);
  std::vector<T> valid(static_cast<size_t>(n * hw * 4), T(0));
  for (std::int64_t i = 0; i < n * hw; ++i) {
    const T uf = std::floor(uv[i]);
    const T vf = std::floor(vv[i]);
    u_floor[i] = uf;
    v_floor[i] = vf;
    if (!(zv[i] > static_cast<T>(kNearPlane)) || !(std::abs(uf) < T(1e6)) || !(std::abs(vf) < T(1e6))) continue;
    for (int corner = 0; corner < 4; ++corner) {
      const auto tu = static_cast<std::int64_t>(uf) + (corner & 1);
      const auto tv = static_cast<std::int64_t>(vf) + (corner >> 1);
      if (tu < 0 || tu >= w || tv < 0 || tv >= h) continue;
      target[i * 4 + corner] = tv * w + tu;
      valid[i * 4 + corner] = T(1);
    }
  }
  auto fu = ad::reshape(u_t - Tensor<T>::from({n, hw}, std::move(u_floor)), {n, hw, 1});
  auto fv = ad::reshape(v_t - Tensor<T>::from({n, hw}, std::move(v_floor)), {n, hw, 1});
  auto gu = T(1) - fu;
  auto gv = T(1) - fv;
  // Corner order matches `target`: (0,0), (1,0), (0,1), (1,1).
  auto bilinear = ad::reshape(ad::concat<T>({gu * gv, fu * gv, gu * fv, fu * fv}, 2), {n, hw * 4});

  const T eps = static_cast<T>(cfg.coverage_eps);
  auto z_rep = ad::reshape(ad::reshape(qz, {n, hw, 1}) * Tensor<T>::full({1, 1, 4}, T(1)), {n, hw * 4});
  auto coverage = ad::scatter_add(bilinear, target, hw);
  auto z_sum = ad::scatter_add(bilinear * z_rep, target, hw);
  auto z_ref = ad::add_scalar(z_sum, eps * d0) / ad::add_scalar(coverage, eps);
  auto z_ref_rep = ad::gather(z_ref, target, hw * 4);
  auto mask = Tensor<T>::from({n, hw * 4}, std::move(valid));
  auto visibility = ad::exp(ad::scale((z_ref_rep - z_rep) * mask, T(1) / static_cast<T>(cfg.splat_sigma)));
  auto weight = bilinear * visibility;  // [N,HW*4]

  auto colors = ad::reshape(canonical, {n, hw, 1, 3});
  auto weighted = ad::reshape(ad::reshape(weight, {n, hw, 4, 1}) * colors, {n, hw * 4, 3});
  auto num = ad::scatter_add(weighted, target, hw);         // [N,HW,3]
  auto den = ad::reshape(ad::scatter_add(weight, target, hw), {n, hw, 1});
  auto out = ad::add_scalar(num, eps * static_cast<T>(cfg.background)) / ad::add_scalar(den, eps);
  return ad::reshape(out, {n, h, w, 3});
}

template <typename T>
Tensor<T> render(const SceneParams<T>& params, const CameraIntrinsics& intr, const RenderConfig& cfg) {
  const T scale = static_cast<T>(intr.focal / cfg.standoff);
  auto normals = normals_from_depth(params.depth, scale);
  auto canonical = shade(params.albedo, normals, params.light);
  return reproject(canonical, params.depth, params.camera, intr, cfg);
}

#define PDR_INSTANTIATE_RENDER(T)                                                                          \
  template Tensor<T> normals_from_depth(const Tensor<T>&, T);                                              \
  template Tensor<T> light_direction(const Tensor<T>&);                                                    \
  template Tensor<T> shade(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                          \
  template Tensor<T> reproject(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, const CameraIntrinsics&, \
                               const RenderConfig&);                                                       \
  template Tensor<T> render(const SceneParams<T>&, const CameraIntrinsics&, const RenderConfig&);

PDR_INSTANTIATE_RENDER(float)
PDR_INSTANTIATE_RENDER(double)

#undef PDR_INSTANTIATE_RENDER

}  // namespace pdr::render
