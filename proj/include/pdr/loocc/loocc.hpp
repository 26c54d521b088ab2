// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

// Leave-one-out cycle contrastive objective: perturb one predicted scene
// parameter, re-render, re-encode, and contrast the untouched feature blocks.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pdr/ad/tensor.hpp"
#include "pdr/nets/model.hpp"
#include "pdr/render/renderer.hpp"
#include "pdr/rng.hpp"

namespace pdr::loocc {

enum class Mode : int { none = 0, light = 1, light_view = 2 };

/// Accepts "none"/"NONE", "loocc-l"/"L", "loocc-lv"/"LV".
Mode parse_mode(std::string_view name);
/// "none", "loocc-l" or "loocc-lv".
std::string_view mode_name(Mode m);

/// Which scene parameter an augmentation changed.
enum class Perturbed : int { light = 0, camera = 1 };

nets::Block perturbed_block(Perturbed p);

/// Half-widths of the uniform deltas added to predicted parameters.
struct PerturbRanges {
  std::array<double, 4> light{0.5, 0.5, 45.0, 45.0};  // k_amb, k_diff, pitch, yaw
  double camera_pitch = 22.5;                          // added to rx
  double camera_yaw = 45.0;                            // added to ry
};

struct LooccConfig {
  Mode mode = Mode::none;
  double temperature = 0.5;
  double alpha = 0.01;  // contrastive weight
  double beta = 1.0;    // reconstruction weight
  std::int64_t batch_size = 16;
  double learning_rate = 1e-3;
  int patience = 10;
  int max_epochs = 100;
  bool detach_aug = false;
  PerturbRanges perturb{};

  void check() const;
};

template <typename T>
struct Augmented {
  SceneParams<T> params;
  std::vector<Perturbed> which;  // one entry per sample
};

/// Per sample: picks light (mode L) or light/camera with equal odds (mode
/// LV), adds uniform deltas to the chosen parameter and clamps back into
/// `ranges`. Other fields are passed through untouched.
template <typename T>
Augmented<T> perturb(const SceneParams<T>& params, Mode mode, const PerturbRanges& deltas, const ParamRanges& ranges,
                     Rng& rng);

template <typename T>
struct Cycle {
  nets::FeatureSet<T> features;      // encode(x)
  SceneParams<T> params;             // decode(features)
  ad::Tensor<T> reconstruction;      // render(params)
  Augmented<T> augmented;
  ad::Tensor<T> augmented_image;     // render(augmented.params), detached when detach_aug
  nets::FeatureSet<T> augmented_features;
};

template <typename T>
Cycle<T> cyclic_encode(const ad::Tensor<T>& images, const nets::InverseRenderer<T>& model,
                       const render::Renderer& renderer, const LooccConfig& cfg, Rng& rng);

/// Row i stacks the three blocks other than which[i], in (geom, alb, cam,
/// light) order, then L2-normalizes. Returns [N, 3F].
template <typename T>
ad::Tensor<T> leave_one_out(const nets::FeatureSet<T>& z, const std::vector<Perturbed>& which);

/// NT-Xent over the 2N views {u_i} and {v_i}; u_i and v_i are positives.
template <typename T>
ad::Tensor<T> nt_xent(const ad::Tensor<T>& u, const ad::Tensor<T>& v, double temperature);

/// Mean absolute difference.
template <typename T>
ad::Tensor<T> reconstruction_loss(const ad::Tensor<T>& x, const ad::Tensor<T>& reconstruction);

template <typename T>
struct LossTerms {
  ad::Tensor<T> total;
  ad::Tensor<T> recon;
  ad::Tensor<T> cont;  // undefined in mode none
  double recon_value = 0.0;
  double cont_value = 0.0;  // 0 in mode none
  double total_value = 0.0;
  std::vector<Perturbed> which;
};

/// beta * recon + alpha * cont (the contrastive term only when mode != none).
template <typename T>
LossTerms<T> total_loss(const ad::Tensor<T>& images, const nets::InverseRenderer<T>& model,
                        const render::Renderer& renderer, const LooccConfig& cfg, Rng& rng);

}  // namespace pdr::loocc
