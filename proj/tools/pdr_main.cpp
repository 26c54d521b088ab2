// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

// pdr: generate | train | eval | render-preview
//
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <CLI11.hpp>

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "pdr/ad/parallel.hpp"
#include "pdr/app/commands.hpp"
#include "pdr/app/config.hpp"
#include "pdr/io/pdrt.hpp"

namespace {

namespace fs = std::filesystem;
using pdr::app::UsageError;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct Globals {
  std::string config_path;
  std::optional<int> threads;
  bool print_config = false;
  std::string summary_path;
};

pdr::app::ExperimentConfig resolve_config(const Globals& g) {
  return g.config_path.empty() ? pdr::app::ExperimentConfig{} : pdr::app::load_config(g.config_path);
}

void emit(const pdr::io::Json& summary, const Globals& g) {
  const auto text = summary.dump(2) + "\n";
  std::cout << text;
  if (!g.summary_path.empty()) pdr::io::write_text(g.summary_path, text);
}

template <class T>
std::optional<T> opt_if(const CLI::Option* o, const T& v) {
  return o->count() > 0 ? std::optional<T>(v) : std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Physically disentangled inverse rendering with cyclic contrastive training"};
  app.require_subcommand(0, 1);

  Globals g;
  app.add_option("--config", g.config_path, "Experiment config (JSON); defaults are used when omitted")
      ->check(CLI::ExistingFile);
  auto* threads_opt = app.add_option("--threads", g.threads, "Worker cap for data-parallel loops (env PDR_THREADS)")
                          ->check(CLI::PositiveNumber);
  app.add_flag("--print-config", g.print_config, "Print the resolved config as JSON and exit");
  app.add_option("--summary", g.summary_path, "Also write the JSON summary to this file");

  // generate
  auto* gen = app.add_subcommand("generate", "Render a labelled synthetic dataset");
  std::string gen_out;
  gen->add_option("--out", gen_out, "Dataset directory (default <output_dir>/dataset)");

  // train
  auto* train = app.add_subcommand("train", "Train the inverse renderer");
  std::string train_dataset, train_out, train_mode;
  int train_epochs = 0;
  bool train_resume = false;
  train->add_option("--dataset", train_dataset, "Dataset directory")->required();
  train->add_option("--out", train_out, "Run directory (default output_dir from the config)");
  auto* mode_opt = train->add_option("--mode", train_mode, "none | loocc-l | loocc-lv (default from the config)");
  auto* epochs_opt = train->add_option("--max-epochs", train_epochs, "Epoch budget")->check(CLI::NonNegativeNumber);
  train->add_flag("--resume", train_resume, "Continue from <out>/last");

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a trained checkpoint");
  pdr::app::EvalOptions eo;
  std::string eval_ckpt, eval_dataset, eval_blocks, eval_probe_mode = "frozen";
  std::int64_t eval_n_train = 0;
  int eval_k = 0, eval_ig_steps = 0, eval_ig_samples = 0;
  ev->add_option("--checkpoint", eval_ckpt, "Checkpoint directory")->required();
  ev->add_option("--dataset", eval_dataset, "Dataset directory")->required();
  ev->add_option("--task", eo.task, "cluster | probe | disentangle | attribute")
      ->required()
      ->check(CLI::IsMember({"cluster", "probe", "disentangle", "attribute"}));
  auto* blocks_opt = ev->add_option("--blocks", eval_blocks, "Representation blocks, e.g. geom,alb");
  ev->add_option("--label", eo.label, "shape | albedo")->check(CLI::IsMember({"shape", "albedo"}));
  ev->add_option("--split", eo.split, "train | val | test")->check(CLI::IsMember({"train", "val", "test"}));
  auto* ntrain_opt = ev->add_option("--n-train", eval_n_train, "Probe training samples")->check(CLI::PositiveNumber);
  ev->add_option("--mode", eval_probe_mode, "Probe mode: frozen | finetune")
      ->check(CLI::IsMember({"frozen", "finetune"}));
  auto* k_opt = ev->add_option("--k", eval_k, "Cluster count (default: class count)")->check(CLI::PositiveNumber);
  ev->add_flag("--baseline", eo.baseline, "Cluster: also score raw pixels after PCA");
  ev->add_option("--baseline-dims", eo.baseline_dims, "PCA components for the pixel baseline")
      ->check(CLI::PositiveNumber);
  auto* steps_opt = ev->add_option("--ig-steps", eval_ig_steps, "Integrated-gradient steps")->check(CLI::PositiveNumber);
  auto* samples_opt =
      ev->add_option("--ig-samples", eval_ig_samples, "Test samples to attribute")->check(CLI::PositiveNumber);

  // render-preview
  auto* prev = app.add_subcommand("render-preview", "Render a scene with camera/light overrides");
  pdr::app::PreviewOptions po;
  std::string prev_ckpt, prev_dataset, prev_out;
  std::array<double, 6> cam{};
  std::array<double, 4> light{};
  prev->add_option("--dataset", prev_dataset, "Dataset directory")->required();
  prev->add_option("--index", po.index, "Example index")->check(CLI::NonNegativeNumber);
  auto* pckpt_opt = prev->add_option("--checkpoint", prev_ckpt, "Use the model's predicted parameters");
  prev->add_option("--out", prev_out, "Output directory")->required();
  const char* cam_names[] = {"--rx", "--ry", "--rz", "--tx", "--ty", "--tz"};
  const char* cam_help[] = {"Pitch (deg)", "Yaw (deg)", "Roll (deg)", "Shift x", "Shift y", "Shift z"};
  std::array<CLI::Option*, 6> cam_opts{};
  for (int i = 0; i < 6; ++i) cam_opts[i] = prev->add_option(cam_names[i], cam[i], cam_help[i]);
  const char* light_names[] = {"--k-amb", "--k-diff", "--light-pitch", "--light-yaw"};
  const char* light_help[] = {"Ambient strength", "Diffuse strength", "Light pitch (deg)", "Light yaw (deg)"};
  std::array<CLI::Option*, 4> light_opts{};
  for (int i = 0; i < 4; ++i) light_opts[i] = prev->add_option(light_names[i], light[i], light_help[i]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (threads_opt->count() > 0) pdr::ad::set_num_threads(*g.threads);
    const auto cfg = resolve_config(g);
    if (g.print_config) {
      std::cout << pdr::app::to_json(cfg).dump(2) << "\n";
      return kExitOk;
    }
    if (app.get_subcommands().empty()) {
      std::cerr << app.help();
      return kExitUsage;
    }

    if (gen->parsed()) {
      const fs::path out = gen_out.empty() ? fs::path(cfg.output_dir) / "dataset" : fs::path(gen_out);
      emit(pdr::app::cmd_generate(cfg, out, std::cerr), g);
    } else if (train->parsed()) {
      pdr::app::TrainOptions to;
      to.dataset = train_dataset;
      to.out = train_out;
      to.resume = train_resume;
      if (mode_opt->count() > 0) {
        try {
          to.mode = pdr::loocc::parse_mode(train_mode);
        } catch (const std::invalid_argument& e) {
          throw UsageError(e.what());
        }
      }
      to.max_epochs = opt_if(epochs_opt, train_epochs);
      emit(pdr::app::cmd_train(cfg, to, std::cerr), g);
    } else if (ev->parsed()) {
      eo.checkpoint = eval_ckpt;
      eo.dataset = eval_dataset;
      eo.blocks = opt_if(blocks_opt, eval_blocks);
      eo.n_train = opt_if(ntrain_opt, eval_n_train);
      eo.probe_mode = pdr::eval::parse_probe_mode(eval_probe_mode);
      eo.k = opt_if(k_opt, eval_k);
      eo.ig_steps = opt_if(steps_opt, eval_ig_steps);
      eo.ig_samples = opt_if(samples_opt, eval_ig_samples);
      emit(pdr::app::cmd_eval(eo, std::cerr), g);
    } else if (prev->parsed()) {
      po.dataset = prev_dataset;
      po.out = prev_out;
      if (pckpt_opt->count() > 0) po.checkpoint = fs::path(prev_ckpt);
      for (int i = 0; i < 6; ++i) po.camera[i] = opt_if(cam_opts[i], cam[i]);
      for (int i = 0; i < 4; ++i) po.light[i] = opt_if(light_opts[i], light[i]);
      emit(pdr::app::cmd_render_preview(po, std::cerr), g);
    }
  } catch (const UsageError& e) {
    std::cerr << "pdr: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "pdr: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
