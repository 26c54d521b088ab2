// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pdr/scene/scene.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pdr/ad/ops.hpp"

namespace pdr {

std::array<double, 2> ParamRanges::light_bounds(int i) const {
  if (i < 2) return {0.0, 1.0};
  return {-max_light_angle, max_light_angle};
}

std::array<double, 2> ParamRanges::camera_bounds(int i) const {
  if (i < 3) return {-max_camera_rotation, max_camera_rotation};
  return {-max_camera_translation, max_camera_translation};
}

template <typename T>
SceneParams<T> SceneParams<T>::row(std::int64_t i) const {
  return {ad::slice(depth, 0, i, 1).detach(), ad::slice(albedo, 0, i, 1).detach(),
          ad::slice(light, 0, i, 1).detach(), ad::slice(camera, 0, i, 1).detach()};
}

template <typename T>
SceneParams<T> SceneParams<T>::detached() const {
  return {depth.detach(), albedo.detach(), light.detach(), camera.detach()};
}

template <typename T>
SceneParams<T> stack(const std::vector<SceneParams<T>>& parts) {
  std::vector<ad::Tensor<T>> d, a, l, c;
  for (const auto& p : parts) {
    d.push_back(p.depth);
    a.push_back(p.albedo);
    l.push_back(p.light);
    c.push_back(p.camera);
  }
  return {ad::concat(d, 0), ad::concat(a, 0), ad::concat(l, 0), ad::concat(c, 0)};
}

namespace {

template <typename T>
void check_range(const char* field, std::span<const T> values, std::int64_t stride, std::int64_t component, double lo,
                 double hi, double tol) {
  for (size_t i = static_cast<size_t>(component); i < values.size(); i += static_cast<size_t>(stride)) {
    const double v = values[i];
    if (!std::isfinite(v) || v < lo - tol || v > hi + tol) {
      std::ostringstream os;
      os << field << " value " << v << " at flat index " << i << " outside [" << lo << ", " << hi << "]";
      throw std::invalid_argument(os.str());
    }
  }
}

}  // namespace

template <typename T>
void validate(const SceneParams<T>& p, const ParamRanges& r, double tol) {
  if (p.depth.rank() != 3) throw std::invalid_argument("depth must be [N,H,W], got " + ad::shape_str(p.depth.shape()));
  const auto n = p.depth.dim(0), h = p.depth.dim(1), w = p.depth.dim(2);
  if (p.albedo.shape() != ad::Shape{n, h, w, 3}) {
    throw std::invalid_argument("albedo must be " + ad::shape_str({n, h, w, 3}) + ", got " +
                                ad::shape_str(p.albedo.shape()));
  }
  if (p.light.shape() != ad::Shape{n, 4}) {
    throw std::invalid_argument("light must be [N,4], got " + ad::shape_str(p.light.shape()));
  }
  if (p.camera.shape() != ad::Shape{n, 6}) {
    throw std::invalid_argument("camera must be [N,6], got " + ad::shape_str(p.camera.shape()));
  }
  check_range<T>("depth", p.depth.data(), 1, 0, r.depth_min(), r.depth_max(), tol);
  for (const T v : p.depth.data()) {
    if (!(v > T(0))) throw std::invalid_argument("depth must be strictly positive");
  }
  check_range<T>("albedo", p.albedo.data(), 1, 0, 0.0, 1.0, tol);
  for (int i = 0; i < 4; ++i) {
    const auto b = r.light_bounds(i);
    check_range<T>("light", p.light.data(), 4, i, b[0], b[1], tol);
  }
  for (int i = 0; i < 6; ++i) {
    const auto b = r.camera_bounds(i);
    check_range<T>("camera", p.camera.data(), 6, i, b[0], b[1], tol);
  }
}

template struct SceneParams<float>;
template struct SceneParams<double>;
template void validate(const SceneParams<float>&, const ParamRanges&, double);
template void validate(const SceneParams<double>&, const ParamRanges&, double);
template SceneParams<float> stack(const std::vector<SceneParams<float>>&);
template SceneParams<double> stack(const std::vector<SceneParams<double>>&);

}  // namespace pdr
