// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pdr/scene/generator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pdr::scene {

namespace {

using Color = std::array<double, 3>;

double gauss(double du, double dv, double sigma) { return std::exp(-(du * du + dv * dv) / (2.0 * sigma * sigma)); }

Color hsv(double h, double s, double v) {
  h = h - std::floor(h);
  const double c = v * s;
  const double hp = h * 6.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  Color rgb{};
  switch (static_cast<int>(hp) % 6) {
    case 0: rgb = {c, x, 0}; break;
    case 1: rgb = {x, c, 0}; break;
    case 2: rgb = {0, c, x}; break;
    case 3: rgb = {0, x, c}; break;
    case 4: rgb = {x, 0, c}; break;
    default: rgb = {c, 0, x}; break;
  }
  const double m = v - c;
  for (auto& ch : rgb) ch += m;
  return rgb;
}

// Pixel coordinate mapped to [-1, 1].
double unit_coord(std::int64_t i, std::int64_t size) {
  return size > 1 ? -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(size - 1) : 0.0;
}

}  // namespace

void GeneratorConfig::check() const {
  if (image_size < 4) throw std::invalid_argument("image_size must be at least 4");
  if (num_shape_classes < 1 || num_shape_classes > static_cast<int>(kShapeNames.size()))
    throw std::invalid_argument("num_shape_classes must be in [1, " + std::to_string(kShapeNames.size()) + "]");
  if (num_albedo_classes < 1 || num_albedo_classes > static_cast<int>(kAlbedoNames.size()))
    throw std::invalid_argument("num_albedo_classes must be in [1, " + std::to_string(kAlbedoNames.size()) + "]");
  if (!(ranges.standoff > 0.0) || !(ranges.depth_band > 0.0) || ranges.depth_band >= 1.0)
    throw std::invalid_argument("standoff must be positive and depth_band in (0, 1)");
}

std::vector<double> shape_template(int shape_class, std::int64_t size, Rng& rng) {
  const auto n = static_cast<size_t>(size * size);
  std::vector<double> h(n);
  // Per-template jitter.
  const double angle = rng.uniform(0.0, M_PI);
  const double ca = std::cos(angle), sa = std::sin(angle);
  const double spread = rng.uniform(0.8, 1.2);
  const double cu = rng.uniform(-0.15, 0.15), cv = rng.uniform(-0.15, 0.15);
  for (std::int64_t y = 0; y < size; ++y) {
    for (std::int64_t x = 0; x < size; ++x) {
      const double u0 = unit_coord(x, size) - cu, v0 = unit_coord(y, size) - cv;
      const double u = (ca * u0 + sa * v0) / spread, v = (-sa * u0 + ca * v0) / spread;
      double value = 0.0;
      switch (shape_class) {
        case 0: value = gauss(u, v, 0.55); break;
        case 1: value = std::exp(-(v * v) / (2.0 * 0.22 * 0.22)); break;
        case 2: {
          // smoothed square pyramid: 1 - soft L6 norm
          const double au = std::sqrt(u * u + 1e-3), av = std::sqrt(v * v + 1e-3);
          value = std::max(0.0, 1.0 - std::pow(std::pow(au, 6) + std::pow(av, 6), 1.0 / 6.0));
          value = value * value * (3.0 - 2.0 * value);
          break;
        }
        case 3: value = 0.5 + 0.5 * std::tanh(1.5 * (u * u - v * v)); break;
        case 4: value = gauss(u - 0.45, v, 0.28) + gauss(u + 0.45, v, 0.28); break;
        default: throw std::invalid_argument("shape class out of range");
      }
      h[static_cast<size_t>(y * size + x)] = value;
    }
  }
  // Up to four small seeded bumps.
  const auto bumps = 1 + static_cast<int>(rng.below(4));
  for (int b = 0; b < bumps; ++b) {
    const double bu = rng.uniform(-0.8, 0.8), bv = rng.uniform(-0.8, 0.8);
    const double sigma = rng.uniform(0.12, 0.3), amp = rng.uniform(-0.15, 0.15);
    for (std::int64_t y = 0; y < size; ++y)
      for (std::int64_t x = 0; x < size; ++x)
        h[static_cast<size_t>(y * size + x)] += amp * gauss(unit_coord(x, size) - bu, unit_coord(y, size) - bv, sigma);
  }
  const auto [lo, hi] = std::minmax_element(h.begin(), h.end());
  const double a = *lo, range = std::max(*hi - *lo, 1e-12);
  for (auto& v : h) v = (v - a) / range;
  return h;
}

std::vector<double> albedo_pattern(int albedo_class, std::int64_t size, Rng& rng) {
  const double hue = rng.uniform();
  const Color c1 = hsv(hue, rng.uniform(0.45, 0.9), rng.uniform(0.6, 0.95));
  const Color c2 = hsv(hue + rng.uniform(0.3, 0.7), rng.uniform(0.45, 0.9), rng.uniform(0.25, 0.6));
  const double cells = static_cast<double>(3 + rng.below(4));  // 3..6 stripes or checks across
  const double phase = rng.uniform(0.0, 1.0);
  const double cu = rng.uniform(-0.3, 0.3), cv = rng.uniform(-0.3, 0.3);
  std::vector<double> out(static_cast<size_t>(size * size * 3));
  for (std::int64_t y = 0; y < size; ++y) {
    for (std::int64_t x = 0; x < size; ++x) {
      const double u = 0.5 * (unit_coord(x, size) + 1.0), v = 0.5 * (unit_coord(y, size) + 1.0);
      double t = 0.0;  // blend from c1 to c2
      switch (albedo_class) {
        case 0: t = 0.0; break;
        case 1: t = static_cast<double>(static_cast<std::int64_t>(std::floor(v * cells + phase)) & 1); break;
        case 2:
          t = static_cast<double>((static_cast<std::int64_t>(std::floor(u * cells + phase)) +
                                   static_cast<std::int64_t>(std::floor(v * cells + phase))) &
                                  1);
          break;
        case 3: {
          const double du = unit_coord(x, size) - cu, dv = unit_coord(y, size) - cv;
          t = std::min(1.0, std::sqrt(du * du + dv * dv) / 1.3);
          break;
        }
        default: throw std::invalid_argument("albedo class out of range");
      }
      for (int ch = 0; ch < 3; ++ch) {
        out[static_cast<size_t>((y * size + x) * 3 + ch)] = std::clamp((1.0 - t) * c1[ch] + t * c2[ch], 0.0, 1.0);
      }
    }
  }
  return out;
}

template <typename T>
LabeledScene<T> generate_scene(std::uint64_t seed, int shape_class, int albedo_class, const GeneratorConfig& cfg) {
  cfg.check();
  if (shape_class < 0 || shape_class >= cfg.num_shape_classes)
    throw std::invalid_argument("shape_class " + std::to_string(shape_class) + " outside [0, " +
                                std::to_string(cfg.num_shape_classes) + ")");
  if (albedo_class < 0 || albedo_class >= cfg.num_albedo_classes)
    throw std::invalid_argument("albedo_class " + std::to_string(albedo_class) + " outside [0, " +
                                std::to_string(cfg.num_albedo_classes) + ")");

  // Independent streams so that changing one class leaves the other draws intact.
  Rng shape_rng(mix_seed(seed, 1)), albedo_rng(mix_seed(seed, 2)), pose_rng(mix_seed(seed, 3));
  const auto s = cfg.image_size;

  const auto height = shape_template(shape_class, s, shape_rng);
  // Raised parts sit closer to the camera; relief uses 60-95% of the band.
  const double relief = shape_rng.uniform(0.6, 0.95) * cfg.ranges.depth_band * cfg.ranges.standoff;
  std::vector<T> depth(height.size());
  for (size_t i = 0; i < height.size(); ++i)
    depth[i] = static_cast<T>(cfg.ranges.standoff + relief * (1.0 - 2.0 * height[i]));

  const auto albedo_d = albedo_pattern(albedo_class, s, albedo_rng);
  std::vector<T> albedo(albedo_d.begin(), albedo_d.end());

  std::vector<T> light(4);
  for (int i = 0; i < 4; ++i) {
    const auto b = cfg.ranges.light_bounds(i);
    const double v = cfg.canonical_light[i] + pose_rng.uniform(-cfg.light_delta[i], cfg.light_delta[i]);
    light[i] = static_cast<T>(std::clamp(v, b[0], b[1]));
  }
  std::vector<T> camera(6, T(0));
  camera[0] = static_cast<T>(pose_rng.uniform(-cfg.camera_pitch_delta, cfg.camera_pitch_delta));
  camera[1] = static_cast<T>(pose_rng.uniform(-cfg.camera_yaw_delta, cfg.camera_yaw_delta));

  LabeledScene<T> scene;
  scene.params.depth = ad::Tensor<T>::from({1, s, s}, std::move(depth));
  scene.params.albedo = ad::Tensor<T>::from({1, s, s, 3}, std::move(albedo));
  scene.params.light = ad::Tensor<T>::from({1, 4}, std::move(light));
  scene.params.camera = ad::Tensor<T>::from({1, 6}, std::move(camera));
  scene.shape_class = shape_class;
  scene.albedo_class = albedo_class;
  scene.seed = seed;

  auto rcfg = cfg.render;
  rcfg.standoff = cfg.ranges.standoff;
  scene.image = render::render(scene.params, render::CameraIntrinsics::from_fov(s, cfg.fov_degrees), rcfg);
  return scene;
}

template LabeledScene<float> generate_scene(std::uint64_t, int, int, const GeneratorConfig&);
template LabeledScene<double> generate_scene(std::uint64_t, int, int, const GeneratorConfig&);

}  // namespace pdr::scene
