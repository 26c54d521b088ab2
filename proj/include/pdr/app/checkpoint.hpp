// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

// Checkpoint directory:
//   checkpoint.json     config echo, training state, tensor index
//   tensors/<name>.pdrt parameters; adam/<name>.m.pdrt, adam/<name>.v.pdrt moments

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pdr/app/config.hpp"
#include "pdr/loocc/trainer.hpp"

namespace pdr::app {

struct Checkpoint {
  ExperimentConfig config;
  int epoch = 0;
  double val_recon = 0.0;  // at `epoch`
  double best_val = 0.0;
  int best_epoch = 0;
  int bad_epochs = 0;
  std::string rng_state;
  std::int64_t adam_steps = 0;
  nets::NamedParams<float> params;              // values only
  std::vector<std::vector<float>> adam_m, adam_v;  // parallel to params
};

Checkpoint capture(loocc::Trainer& trainer, const ExperimentConfig& config, double val_recon);
/// Copies parameters, optimizer moments, RNG and stopping state into `trainer`.
void restore(loocc::Trainer& trainer, const Checkpoint& ckpt);

void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

/// Model rebuilt from the checkpoint's architecture with its parameters.
nets::InverseRenderer<float> load_model(const Checkpoint& ckpt);
/// Overwrites model parameters by name; throws on missing or mis-shaped entries.
void assign_parameters(nets::InverseRenderer<float>& model, const nets::NamedParams<float>& values);

}  // namespace pdr::app
