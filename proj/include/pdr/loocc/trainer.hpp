// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "pdr/ad/optim.hpp"
#include "pdr/io/json_util.hpp"
#include "pdr/loocc/loocc.hpp"
#include "pdr/scene/dataset.hpp"

namespace pdr::loocc {

/// Counts consecutive non-improving epochs; training stops on the
/// (patience + 1)-th one.
struct EarlyStopping {
  int patience = 10;
  double best = std::numeric_limits<double>::infinity();
  int best_epoch = -1;
  int bad_epochs = 0;

  /// Returns true when `value` improves on the best so far.
  bool update(int epoch, double value);
  bool should_stop() const { return bad_epochs > patience; }
};

/// One line of the metrics log. Epoch 0 is measured before any update and
/// has no training terms.
struct EpochMetrics {
  int epoch = 0;
  std::optional<double> train_recon;
  std::optional<double> train_cont;
  double val_recon = 0.0;
  double lr = 0.0;
  double seconds = 0.0;
};

io::Json to_json(const EpochMetrics& m);

/// Owns the model, optimizer and random stream of one run (32-bit).
class Trainer {
 public:
  Trainer(const scene::Dataset& data, const nets::Architecture& arch, const LooccConfig& cfg,
          const render::Renderer& renderer, std::uint64_t init_seed, std::uint64_t train_seed);

  /// Epoch-0 evaluation; valid only before the first training epoch.
  EpochMetrics evaluate_initial();
  /// One pass over the shuffled training split, then validation.
  EpochMetrics run_epoch();
  /// Mean L1 reconstruction error over the validation split (no graph).
  double validation_loss() const;

  /// Runs until max_epochs or early stopping. `on_epoch` sees every metrics
  /// line; `on_checkpoint(improved)` fires after every epoch.
  void fit(const std::function<void(const EpochMetrics&)>& on_epoch,
           const std::function<void(bool improved)>& on_checkpoint);

  nets::InverseRenderer<float>& model() { return model_; }
  const nets::InverseRenderer<float>& model() const { return model_; }
  ad::Adam<float>& optimizer() { return optimizer_; }
  Rng& rng() { return rng_; }
  const LooccConfig& config() const { return cfg_; }
  EarlyStopping& early_stopping() { return early_; }
  const EarlyStopping& early_stopping() const { return early_; }
  int epoch() const { return epoch_; }
  void set_epoch(int epoch) { epoch_ = epoch; }
  bool started() const { return epoch_ >= 0; }

 private:
  const scene::Dataset& data_;
  LooccConfig cfg_;
  render::Renderer renderer_;
  nets::InverseRenderer<float> model_;
  ad::Adam<float> optimizer_;
  Rng rng_;
  EarlyStopping early_;
  int epoch_ = -1;  // last completed epoch, -1 before the initial evaluation
  std::vector<std::size_t> train_idx_, val_idx_;
};

}  // namespace pdr::loocc
