// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pdr/loocc/loocc.hpp"

#include <stdexcept>

#include "pdr/ad/ops.hpp"

namespace pdr::loocc {

using ad::Tensor;

Mode parse_mode(std::string_view name) {
  if (name == "none" || name == "NONE") return Mode::none;
  if (name == "loocc-l" || name == "L") return Mode::light;
  if (name == "loocc-lv" || name == "LV") return Mode::light_view;
  throw std::invalid_argument("unknown training mode '" + std::string(name) + "' (expected none, loocc-l, loocc-lv)");
}

std::string_view mode_name(Mode m) {
  switch (m) {
    case Mode::none: return "none";
    case Mode::light: return "loocc-l";
    case Mode::light_view: return "loocc-lv";
  }
  return "?";
}

nets::Block perturbed_block(Perturbed p) { return p == Perturbed::light ? nets::Block::light : nets::Block::cam; }

void LooccConfig::check() const {
  if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
  if (alpha < 0.0 || beta < 0.0) throw std::invalid_argument("alpha and beta must be non-negative");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be positive");
  if (mode != Mode::none && batch_size < 2) throw std::invalid_argument("contrastive modes need batch_size >= 2");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (patience < 1) throw std::invalid_argument("patience must be at least 1");
  if (max_epochs < 0) throw std::invalid_argument("max_epochs must be non-negative");
  for (double d : perturb.light)
    if (d < 0.0) throw std::invalid_argument("perturbation widths must be non-negative");
  if (perturb.camera_pitch < 0.0 || perturb.camera_yaw < 0.0)
    throw std::invalid_argument("perturbation widths must be non-negative");
}

namespace {

// x + delta, clamped into per-column bounds. Columns whose delta is zero
// everywhere keep their values bit-for-bit (in-range inputs are fixed points).
template <typename T>
Tensor<T> shift_and_clamp(const Tensor<T>& x, std::vector<T> delta, const std::vector<std::array<double, 2>>& bounds) {
  const auto n = x.dim(0), c = x.dim(1);
  auto shifted = x + Tensor<T>::from({n, c}, std::move(delta));
  std::vector<Tensor<T>> cols;
  for (std::int64_t j = 0; j < c; ++j) {
    const auto& b = bounds[static_cast<std::size_t>(j)];
    cols.push_back(ad::clamp(ad::slice(shifted, 1, j, 1), static_cast<T>(b[0]), static_cast<T>(b[1])));
  }
  return ad::concat(cols, 1);
}

}  // namespace

template <typename T>
Augmented<T> perturb(const SceneParams<T>& params, Mode mode, const PerturbRanges& deltas, const ParamRanges& ranges,
                     Rng& rng) {
  if (mode == Mode::none) throw std::invalid_argument("perturb: mode none has no augmentation");
  const auto n = params.batch();
  Augmented<T> out;
  out.which.resize(static_cast<std::size_t>(n));
  std::vector<T> light_delta(static_cast<std::size_t>(n * 4), T(0));
  std::vector<T> camera_delta(static_cast<std::size_t>(n * 6), T(0));
  bool any_light = false, any_camera = false;
  for (std::int64_t i = 0; i < n; ++i) {
    const bool camera = mode == Mode::light_view && rng.below(2) == 1;
    out.which[static_cast<std::size_t>(i)] = camera ? Perturbed::camera : Perturbed::light;
    if (camera) {
      any_camera = true;
      camera_delta[static_cast<std::size_t>(i * 6 + 0)] =
          static_cast<T>(rng.uniform(-deltas.camera_pitch, deltas.camera_pitch));
      camera_delta[static_cast<std::size_t>(i * 6 + 1)] =
          static_cast<T>(rng.uniform(-deltas.camera_yaw, deltas.camera_yaw));
    } else {
      any_light = true;
      for (int k = 0; k < 4; ++k)
        light_delta[static_cast<std::size_t>(i * 4 + k)] =
            static_cast<T>(rng.uniform(-deltas.light[static_cast<std::size_t>(k)], deltas.light[static_cast<std::size_t>(k)]));
    }
  }
  out.params.depth = params.depth;
  out.params.albedo = params.albedo;
  std::vector<std::array<double, 2>> lb, cb;
  for (int k = 0; k < 4; ++k) lb.push_back(ranges.light_bounds(k));
  for (int k = 0; k < 6; ++k) cb.push_back(ranges.camera_bounds(k));
  out.params.light = any_light ? shift_and_clamp(params.light, std::move(light_delta), lb) : params.light;
  out.params.camera = any_camera ? shift_and_clamp(params.camera, std::move(camera_delta), cb) : params.camera;
  return out;
}

template <typename T>
Cycle<T> cyclic_encode(const Tensor<T>& images, const nets::InverseRenderer<T>& model,
                       const render::Renderer& renderer, const LooccConfig& cfg, Rng& rng) {
  if (cfg.mode == Mode::none) throw std::invalid_argument("cyclic_encode: mode none has no cycle");
  Cycle<T> c;
  c.features = model.encode(images);
  c.params = model.decode(c.features);
  c.reconstruction = renderer(c.params);
  c.augmented = perturb(c.params, cfg.mode, cfg.perturb, model.ranges(), rng);
  c.augmented_image = renderer(c.augmented.params);
  if (cfg.detach_aug) c.augmented_image = c.augmented_image.detach();
  c.augmented_features = model.encode(c.augmented_image);
  return c;
}

template <typename T>
Tensor<T> leave_one_out(const nets::FeatureSet<T>& z, const std::vector<Perturbed>& which) {
  const auto n = z.batch(), f = z.dim();
  if (static_cast<std::int64_t>(which.size()) != n) throw std::invalid_argument("leave_one_out: one entry per sample");
  using nets::Block;
  bool all_light = true, all_camera = true;
  for (auto w : which) {
    all_light = all_light && w == Perturbed::light;
    all_camera = all_camera && w == Perturbed::camera;
  }
  // Rows that left out light keep cam; rows that left out camera keep light.
  auto without_light = ad::concat<T>({z[Block::geom], z[Block::alb], z[Block::cam]}, 1);
  auto without_camera = ad::concat<T>({z[Block::geom], z[Block::alb], z[Block::light]}, 1);
  Tensor<T> stacked;
  if (all_light) {
    stacked = without_light;
  } else if (all_camera) {
    stacked = without_camera;
  } else {
    auto both = ad::reshape(ad::concat<T>({without_light, without_camera}, 0), {1, 2 * n, 3 * f});
    std::vector<std::int64_t> index(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i)
      index[static_cast<std::size_t>(i)] = which[static_cast<std::size_t>(i)] == Perturbed::light ? i : n + i;
    stacked = ad::reshape(ad::gather(both, index, n), {n, 3 * f});
  }
  return ad::l2_normalize(stacked);
}

template <typename T>
Tensor<T> nt_xent(const Tensor<T>& u, const Tensor<T>& v, double temperature) {
  if (u.rank() != 2 || v.rank() != 2 || u.shape() != v.shape())
    throw std::invalid_argument("nt_xent: operands must be matching [N,D] matrices");
  if (!(temperature > 0.0)) throw std::invalid_argument("nt_xent: temperature must be positive");
  const auto n = u.dim(0);
  if (n < 2) throw std::invalid_argument("nt_xent: needs N >= 2 pairs to form negatives");
  const auto m = 2 * n;
  auto views = ad::l2_normalize(ad::concat<T>({u, v}, 0));  // [2N,D]
  auto sim = ad::scale(ad::matmul(views, ad::transpose(views)), static_cast<T>(1.0 / temperature));
  // Exclude self-similarity from every denominator.
  std::vector<T> mask(static_cast<std::size_t>(m * m), T(0));
  for (std::int64_t i = 0; i < m; ++i) mask[static_cast<std::size_t>(i * m + i)] = T(-1e9);
  auto logp = ad::log_softmax(sim + Tensor<T>::from({m, m}, std::move(mask)));
  std::vector<std::int64_t> positive(static_cast<std::size_t>(m));
  for (std::int64_t i = 0; i < m; ++i) positive[static_cast<std::size_t>(i)] = i < n ? i + n : i - n;
  return ad::neg(ad::mean(ad::gather(logp, positive, 1)));
}

template <typename T>
Tensor<T> reconstruction_loss(const Tensor<T>& x, const Tensor<T>& reconstruction) {
  if (x.shape() != reconstruction.shape())
    throw std::invalid_argument("reconstruction_loss: shape mismatch " + ad::shape_str(x.shape()) + " vs " +
                                ad::shape_str(reconstruction.shape()));
  return ad::mean(ad::abs(x - reconstruction));
}

template <typename T>
LossTerms<T> total_loss(const Tensor<T>& images, const nets::InverseRenderer<T>& model,
                        const render::Renderer& renderer, const LooccConfig& cfg, Rng& rng) {
  cfg.check();
  LossTerms<T> out;
  if (cfg.mode == Mode::none) {
    auto recon = renderer(model.decode(model.encode(images)));
    out.recon = reconstruction_loss(images, recon);
    out.total = ad::scale(out.recon, static_cast<T>(cfg.beta));
  } else {
    auto c = cyclic_encode(images, model, renderer, cfg, rng);
    out.recon = reconstruction_loss(images, c.reconstruction);
    out.cont = nt_xent(leave_one_out(c.features, c.augmented.which),
                       leave_one_out(c.augmented_features, c.augmented.which), cfg.temperature);
    out.total = ad::scale(out.recon, static_cast<T>(cfg.beta)) + ad::scale(out.cont, static_cast<T>(cfg.alpha));
    out.cont_value = static_cast<double>(out.cont.item());
    out.which = std::move(c.augmented.which);
  }
  out.recon_value = static_cast<double>(out.recon.item());
  out.total_value = static_cast<double>(out.total.item());
  return out;
}

#define PDR_INSTANTIATE(T)                                                                                          \
  template Augmented<T> perturb(const SceneParams<T>&, Mode, const PerturbRanges&, const ParamRanges&, Rng&);      \
  template Cycle<T> cyclic_encode(const Tensor<T>&, const nets::InverseRenderer<T>&, const render::Renderer&,      \
                                  const LooccConfig&, Rng&);                                                       \
  template Tensor<T> leave_one_out(const nets::FeatureSet<T>&, const std::vector<Perturbed>&);                     \
  template Tensor<T> nt_xent(const Tensor<T>&, const Tensor<T>&, double);                                          \
  template Tensor<T> reconstruction_loss(const Tensor<T>&, const Tensor<T>&);                                      \
  template LossTerms<T> total_loss(const Tensor<T>&, const nets::InverseRenderer<T>&, const render::Renderer&,     \
                                   const LooccConfig&, Rng&);
PDR_INSTANTIATE(float)
PDR_INSTANTIATE(double)
#undef PDR_INSTANTIATE

}  // namespace pdr::loocc
