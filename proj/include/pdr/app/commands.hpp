// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

// The four pdr subcommands. Each returns the JSON summary it prints.

#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "pdr/app/config.hpp"

namespace pdr::app {

namespace fs = std::filesystem;

/// Builds the dataset described by `cfg` into `out_dir` and returns split and
/// class counts.
io::Json cmd_generate(const ExperimentConfig& cfg, const fs::path& out_dir, std::ostream& log);

struct TrainOptions {
  fs::path dataset;
  fs::path out;  // empty: cfg.output_dir
  std::optional<loocc::Mode> mode;
  std::optional<int> max_epochs;
  bool resume = false;  // continue from <out>/last
};

/// Writes <out>/config.json, <out>/metrics.jsonl, <out>/best and <out>/last.
io::Json cmd_train(ExperimentConfig cfg, const TrainOptions& opts, std::ostream& log);

struct EvalOptions {
  fs::path checkpoint;
  fs::path dataset;
  std::string task;                  // cluster | probe | disentangle | attribute
  std::optional<std::string> blocks;  // default from the config
  std::string label = "shape";        // shape | albedo
  std::string split = "test";
  std::optional<std::int64_t> n_train;
  eval::ProbeMode probe_mode = eval::ProbeMode::frozen;
  std::optional<int> k;               // clusters; default the label's class count
  bool baseline = false;              // cluster: add the raw-pixel PCA baseline
  std::int64_t baseline_dims = 512;
  std::optional<int> ig_steps;
  std::optional<int> ig_samples;
};

io::Json cmd_eval(const EvalOptions& opts, std::ostream& log);

struct PreviewOptions {
  std::optional<fs::path> checkpoint;  // decode the model's prediction instead of ground truth
  fs::path dataset;
  std::int64_t index = 0;
  std::array<std::optional<double>, 6> camera;  // rx, ry, rz, tx, ty, tz (absolute)
  std::array<std::optional<double>, 4> light;   // k_amb, k_diff, pitch, yaw (absolute)
  fs::path out;
};

/// Writes canonical.{png,pdrt} (parameters as given) and override.{png,pdrt}
/// (with the overrides applied, clamped into range with a warning).
io::Json cmd_render_preview(const PreviewOptions& opts, std::ostream& log);

}  // namespace pdr::app
