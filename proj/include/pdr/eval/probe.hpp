// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

// Linear probes on learned representations.

#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "pdr/ad/tensor.hpp"
#include "pdr/eval/clustering.hpp"
#include "pdr/io/json_util.hpp"
#include "pdr/nets/layers.hpp"
#include "pdr/nets/model.hpp"

namespace pdr::eval {

enum class ProbeMode { frozen, finetune };
ProbeMode parse_probe_mode(std::string_view name);
std::string_view probe_mode_name(ProbeMode m);

struct ProbeConfig {
  int epochs = 100;
  double learning_rate = 1e-3;
  std::int64_t batch_size = 16;
  std::int64_t hidden = 0;  // 0: single linear layer; otherwise one relu hidden layer
  std::uint64_t seed = 0;

  void check() const;
};

/// Standardization (train statistics) followed by a linear (or one-hidden-
/// layer) classifier.
template <typename T>
class ProbeHead {
 public:
  ProbeHead() = default;
  ProbeHead(std::vector<T> mean, std::vector<T> inv_std, int classes, std::int64_t hidden, Rng& rng);

  /// features [B,D] -> logits [B,C]; differentiable in the features.
  ad::Tensor<T> logits(const ad::Tensor<T>& features) const;
  std::vector<ad::Tensor<T>> parameters() const;
  std::int64_t input_dim() const { return static_cast<std::int64_t>(mean_.size()); }
  int classes() const { return classes_; }

 private:
  std::vector<T> mean_, inv_std_;
  int classes_ = 0;
  std::int64_t hidden_ = 0;
  nets::Linear<T> first_, second_;
};

struct ProbeResult {
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  int classes = 0;
  std::int64_t n_train = 0, n_test = 0;
  std::vector<int> test_predictions;
  std::vector<double> loss_trace;  // mean training cross-entropy per epoch
  ProbeHead<double> head;          // frozen mode only
};

io::Json to_json(const ProbeResult& r, ProbeMode mode);

/// `n` distinct indices drawn from [0, available); rejects n > available.
std::vector<std::size_t> sample_subset(std::size_t available, std::int64_t n, std::uint64_t seed);

/// Trains a head on fixed features (rows of `train_x`), Adam with softmax
/// cross-entropy, and reports argmax accuracy on `test_x`.
ProbeResult train_probe(const Matrix& train_x, std::span<const int> train_y, const Matrix& test_x,
                        std::span<const int> test_y, const ProbeConfig& cfg);

/// As train_probe, but the encoders of `blocks` are updated together with the
/// head (32-bit). Standardization uses the initial features.
ProbeResult finetune_probe(nets::InverseRenderer<float>& model, const std::vector<nets::Block>& blocks,
                           const ad::Tensor<float>& train_images, std::span<const int> train_y,
                           const ad::Tensor<float>& test_images, std::span<const int> test_y, const ProbeConfig& cfg);

/// Encodes images [N,H,W,3] in batches without recording a graph.
nets::FeatureSet<float> encode_all(const nets::InverseRenderer<float>& model, const ad::Tensor<float>& images,
                                   std::int64_t batch = 64);

/// extract_representation as a double matrix.
Matrix representation_matrix(const nets::FeatureSet<float>& z, const std::vector<nets::Block>& blocks);

}  // namespace pdr::eval
