// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pdr/loocc/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace pdr::loocc {

bool EarlyStopping::update(int epoch, double value) {
  if (value < best) {
    best = value;
    best_epoch = epoch;
    bad_epochs = 0;
    return true;
  }
  ++bad_epochs;
  return false;
}

io::Json to_json(const EpochMetrics& m) {
  io::Json j;
  j["epoch"] = m.epoch;
  j["train_recon"] = m.train_recon ? io::Json(*m.train_recon) : io::Json(nullptr);
  j["train_cont"] = m.train_cont ? io::Json(*m.train_cont) : io::Json(nullptr);
  j["val_recon"] = m.val_recon;
  j["lr"] = m.lr;
  j["seconds"] = m.seconds;
  return j;
}

Trainer::Trainer(const scene::Dataset& data, const nets::Architecture& arch, const LooccConfig& cfg,
                 const render::Renderer& renderer, std::uint64_t init_seed, std::uint64_t train_seed)
    : data_(data),
      cfg_(cfg),
      renderer_(renderer),
      model_(arch, data.generator.ranges, init_seed),
      optimizer_(model_.parameters(), ad::AdamOptions{cfg.learning_rate, 0.9, 0.999, 1e-8}),
      rng_(train_seed) {
  cfg_.check();
  if (arch.image_size != data.generator.image_size)
    throw std::invalid_argument("architecture image_size " + std::to_string(arch.image_size) +
                                " does not match dataset image_size " + std::to_string(data.generator.image_size));
  if (renderer_.intrinsics.size != arch.image_size)
    throw std::invalid_argument("renderer intrinsics do not match image_size");
  train_idx_ = data.indices(scene::Split::train);
  val_idx_ = data.indices(scene::Split::val);
  if (train_idx_.empty()) throw std::invalid_argument("training split is empty");
  if (val_idx_.empty()) throw std::invalid_argument("validation split is empty");
  early_.patience = cfg_.patience;
}

double Trainer::validation_loss() const {
  ad::NoGradGuard no_grad;
  double total = 0.0;
  const auto b = static_cast<std::size_t>(cfg_.batch_size);
  for (std::size_t start = 0; start < val_idx_.size(); start += b) {
    const auto count = std::min(b, val_idx_.size() - start);
    std::span<const std::size_t> idx(val_idx_.data() + start, count);
    const auto images = data_.images(idx);
    const auto recon = renderer_(model_.decode(model_.encode(images)));
    total += static_cast<double>(reconstruction_loss(images, recon).item()) * static_cast<double>(count);
  }
  return total / static_cast<double>(val_idx_.size());
}

EpochMetrics Trainer::evaluate_initial() {
  if (epoch_ >= 0) throw std::logic_error("evaluate_initial after training started");
  const auto t0 = std::chrono::steady_clock::now();
  EpochMetrics m;
  m.epoch = 0;
  m.val_recon = validation_loss();
  m.lr = cfg_.learning_rate;
  m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  epoch_ = 0;
  return m;
}

EpochMetrics Trainer::run_epoch() {
  if (epoch_ < 0) throw std::logic_error("run_epoch before evaluate_initial");
  const auto t0 = std::chrono::steady_clock::now();
  auto order = train_idx_;
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng_.below(i)]);

  const auto b = static_cast<std::size_t>(cfg_.batch_size);
  const std::size_t min_batch = cfg_.mode == Mode::none ? 1 : 2;
  double recon_sum = 0.0, cont_sum = 0.0;
  std::size_t seen = 0;
  for (std::size_t start = 0; start < order.size(); start += b) {
    const auto count = std::min(b, order.size() - start);
    if (count < min_batch) break;  // a lone sample has no contrastive negatives
    std::span<const std::size_t> idx(order.data() + start, count);
    const auto images = data_.images(idx);
    auto terms = total_loss(images, model_, renderer_, cfg_, rng_);
    terms.total.backward();
    optimizer_.step();
    recon_sum += terms.recon_value * static_cast<double>(count);
    cont_sum += terms.cont_value * static_cast<double>(count);
    seen += count;
  }
  ++epoch_;
  EpochMetrics m;
  m.epoch = epoch_;
  const double denom = static_cast<double>(std::max<std::size_t>(seen, 1));
  m.train_recon = recon_sum / denom;
  if (cfg_.mode != Mode::none) m.train_cont = cont_sum / denom;
  m.val_recon = validation_loss();
  m.lr = cfg_.learning_rate;
  m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return m;
}

void Trainer::fit(const std::function<void(const EpochMetrics&)>& on_epoch,
                  const std::function<void(bool improved)>& on_checkpoint) {
  if (epoch_ < 0) {
    const auto m = evaluate_initial();
    const bool improved = early_.update(0, m.val_recon);
    if (on_epoch) on_epoch(m);
    if (on_checkpoint) on_checkpoint(improved);
  }
  while (epoch_ < cfg_.max_epochs && !early_.should_stop()) {
    const auto m = run_epoch();
    const bool improved = early_.update(m.epoch, m.val_recon);
    if (on_epoch) on_epoch(m);
    if (on_checkpoint) on_checkpoint(improved);
  }
}

}  // namespace pdr::loocc
