// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "pdr/eval/probe.hpp"
#include "pdr/io/json_util.hpp"
#include "pdr/loocc/loocc.hpp"
#include "pdr/nets/model.hpp"
#include "pdr/scene/dataset.hpp"

namespace pdr::app {

/// Bad flags, bad config files or incompatible inputs (exit code 1).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Seeds {
  std::uint64_t data = 1;
  std::uint64_t init = 2;
  std::uint64_t train = 3;
};

struct EvalSettings {
  std::string blocks = "geom,alb";
  std::int64_t n_train = 100;
  int ig_steps = 64;
  int ig_samples = 32;
};

/// Everything needed to reproduce a run. image_size is shared by the
/// generator and the networks.
struct ExperimentConfig {
  nets::Architecture model{};
  scene::GeneratorConfig generator{};
  std::int64_t dataset_size = 1000;
  scene::SplitFractions split{};
  loocc::LooccConfig loocc{};
  eval::ProbeConfig probe{};
  EvalSettings eval{};
  Seeds seeds{};
  std::string output_dir = "runs/default";

  std::int64_t image_size() const { return model.image_size; }
  void set_image_size(std::int64_t s) {
    model.image_size = s;
    generator.image_size = s;
  }
  /// Throws UsageError naming the offending field.
  void check() const;
  render::Renderer renderer() const;
};

io::Json to_json(const ExperimentConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const io::Json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace pdr::app

namespace pdr::loocc {
void to_json(io::Json& j, const LooccConfig& c);
void from_json(const io::Json& j, LooccConfig& c);
}  // namespace pdr::loocc
