// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pdr/app/commands.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <system_error>

#include "pdr/ad/ops.hpp"
#include "pdr/app/checkpoint.hpp"
#include "pdr/eval/attribution.hpp"
#include "pdr/eval/clustering.hpp"
#include "pdr/eval/disentangle.hpp"
#include "pdr/eval/metrics.hpp"
#include "pdr/eval/pca.hpp"
#include "pdr/eval/probe.hpp"
#include "pdr/io/pdrt.hpp"
#include "pdr/io/png_writer.hpp"
#include "pdr/loocc/trainer.hpp"

namespace pdr::app {

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
}

scene::Dataset open_dataset(const fs::path& dir) {
  if (!fs::exists(dir / "manifest.json")) throw UsageError("no dataset manifest at " + (dir / "manifest.json").string());
  return scene::load_dataset(dir);
}

Checkpoint open_checkpoint(const fs::path& dir) {
  if (!fs::exists(dir / "checkpoint.json"))
    throw UsageError("no checkpoint at " + (dir / "checkpoint.json").string());
  return load_checkpoint(dir);
}

void check_compatible(const Checkpoint& ckpt, const scene::Dataset& ds) {
  if (ckpt.config.image_size() != ds.generator.image_size)
    throw UsageError("checkpoint expects " + std::to_string(ckpt.config.image_size()) + "x" +
                     std::to_string(ckpt.config.image_size()) + " images but the dataset holds " +
                     std::to_string(ds.generator.image_size) + "x" + std::to_string(ds.generator.image_size));
}

std::vector<int> labels_for(const scene::Dataset& ds, std::span<const std::size_t> idx, const std::string& label) {
  if (label == "shape") return ds.shape_labels(idx);
  if (label == "albedo") return ds.albedo_labels(idx);
  throw UsageError("unknown label '" + label + "' (expected shape or albedo)");
}

int class_count(const scene::Dataset& ds, const std::string& label) {
  return label == "shape" ? ds.generator.num_shape_classes : ds.generator.num_albedo_classes;
}

std::vector<nets::Block> blocks_from(const std::string& text) {
  try {
    return nets::parse_blocks(text);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

std::array<eval::Matrix, 4> block_matrices(const nets::FeatureSet<float>& z) {
  std::array<eval::Matrix, 4> out;
  for (std::size_t b = 0; b < 4; ++b) out[b] = eval::representation_matrix(z, {nets::kAllBlocks[b]});
  return out;
}

}  // namespace

// --- generate -----------------------------------------------------------------

io::Json cmd_generate(const ExperimentConfig& cfg, const fs::path& out_dir, std::ostream& log) {
  cfg.check();
  const auto ds = scene::build_dataset(cfg.dataset_size, cfg.split, cfg.seeds.data, cfg.generator);
  scene::save_dataset(out_dir, ds);

  io::Json splits = io::Json::object(), shapes = io::Json::object(), albedos = io::Json::object();
  for (auto s : {scene::Split::train, scene::Split::val, scene::Split::test}) {
    const auto idx = ds.indices(s);
    const std::string name(scene::split_name(s));
    splits[name] = idx.size();
    std::vector<int> sc(static_cast<std::size_t>(cfg.generator.num_shape_classes), 0);
    std::vector<int> ac(static_cast<std::size_t>(cfg.generator.num_albedo_classes), 0);
    for (auto i : idx) {
      ++sc[static_cast<std::size_t>(ds.entries[i].shape_class)];
      ++ac[static_cast<std::size_t>(ds.entries[i].albedo_class)];
    }
    shapes[name] = sc;
    albedos[name] = ac;
  }
  const io::Json summary{{"command", "generate"},
                         {"dataset", out_dir.string()},
                         {"size", ds.size()},
                         {"image_size", cfg.image_size()},
                         {"splits", splits},
                         {"shape_classes", shapes},
                         {"albedo_classes", albedos}};
  log << "generated " << ds.size() << " scenes into " << out_dir.string() << " (train " << splits["train"] << ", val "
      << splits["val"] << ", test " << splits["test"] << ")\n";
  return summary;
}

// --- train -----------------------------------------------------------------------

io::Json cmd_train(ExperimentConfig cfg, const TrainOptions& opts, std::ostream& log) {
  const fs::path out = opts.out.empty() ? fs::path(cfg.output_dir) : opts.out;
  std::optional<Checkpoint> resume_from;
  if (opts.resume) {
    resume_from = open_checkpoint(out / "last");
    cfg = resume_from->config;
    if (opts.mode && *opts.mode != cfg.loocc.mode)
      throw UsageError("--mode " + std::string(loocc::mode_name(*opts.mode)) + " conflicts with the checkpoint's " +
                       std::string(loocc::mode_name(cfg.loocc.mode)));
  } else if (opts.mode) {
    cfg.loocc.mode = *opts.mode;
  }
  if (opts.max_epochs) cfg.loocc.max_epochs = *opts.max_epochs;
  cfg.output_dir = out.string();
  cfg.check();

  const auto ds = open_dataset(opts.dataset);
  if (ds.generator.image_size != cfg.image_size())
    throw UsageError("config image_size " + std::to_string(cfg.image_size()) + " does not match the dataset's " +
                     std::to_string(ds.generator.image_size));
  cfg.generator = ds.generator;  // checkpoints echo the generator the data came from

  ensure_dir(out);
  loocc::Trainer trainer(ds, cfg.model, cfg.loocc, cfg.renderer(), cfg.seeds.init, cfg.seeds.train);
  if (resume_from) {
    restore(trainer, *resume_from);
    log << "resuming " << out.string() << " after epoch " << trainer.epoch() << "\n";
  }
  io::write_text(out / "config.json", to_json(cfg).dump(2) + "\n");

  const auto metrics_path = out / "metrics.jsonl";
  std::ofstream metrics(metrics_path, resume_from ? std::ios::app : std::ios::trunc);
  if (!metrics) throw std::runtime_error("cannot open " + metrics_path.string() + " for writing");

  loocc::EpochMetrics last;
  trainer.fit(
      [&](const loocc::EpochMetrics& m) {
        last = m;
        metrics << loocc::to_json(m).dump() << "\n";
        metrics.flush();
        log << "epoch " << m.epoch << " val_recon " << m.val_recon;
        if (m.train_recon) log << " train_recon " << *m.train_recon;
        if (m.train_cont) log << " train_cont " << *m.train_cont;
        log << "\n";
      },
      [&](bool improved) {
        const auto ckpt = capture(trainer, cfg, last.val_recon);
        if (improved) save_checkpoint(out / "best", ckpt);
        save_checkpoint(out / "last", ckpt);
      });
  if (!metrics) throw std::runtime_error("failed writing " + metrics_path.string());

  const auto& es = trainer.early_stopping();
  return {{"command", "train"},
          {"mode", loocc::mode_name(cfg.loocc.mode)},
          {"output", out.string()},
          {"epochs", trainer.epoch()},
          {"best_epoch", es.best_epoch},
          {"best_val_recon", es.best},
          {"stopped_early", es.should_stop()},
          {"parameters", trainer.model().parameter_count()}};
}

// --- eval ------------------------------------------------------------------------

io::Json cmd_eval(const EvalOptions& opts, std::ostream& log) {
  const auto ckpt = open_checkpoint(opts.checkpoint);
  const auto ds = open_dataset(opts.dataset);
  check_compatible(ckpt, ds);
  auto model = load_model(ckpt);
  const auto& cfg = ckpt.config;

  scene::Split split;
  try {
    split = scene::parse_split(opts.split);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto idx = ds.indices(split);
  if (idx.empty()) throw UsageError("split '" + opts.split + "' is empty");
  const auto blocks_text = opts.blocks.value_or(cfg.eval.blocks);
  const auto blocks = blocks_from(blocks_text);
  const auto labels = labels_for(ds, idx, opts.label);
  const auto images = ds.images(idx);

  io::Json report{{"checkpoint", opts.checkpoint.string()},
                  {"mode", loocc::mode_name(cfg.loocc.mode)},
                  {"epoch", ckpt.epoch},
                  {"split", opts.split},
                  {"samples", idx.size()}};

  if (opts.task == "cluster") {
    const int k = opts.k.value_or(class_count(ds, opts.label));
    if (k < 1 || static_cast<std::size_t>(k) > idx.size()) throw UsageError("cluster count k out of range");
    const auto z = eval::encode_all(model, images);
    const auto result = eval::hac_ward(eval::representation_matrix(z, blocks), k);
    report["task"] = "cluster";
    report["label"] = opts.label;
    report["blocks"] = nets::format_blocks(blocks);
    report["k"] = k;
    report["metrics"] = eval::to_json(eval::clustering_report(result.assignments, labels));
    if (opts.baseline) {
      const auto pixels = eval::pca_project(eval::pixel_matrix(images), opts.baseline_dims);
      const auto base = eval::hac_ward(pixels, k);
      report["baseline"] = {{"method", "pixels+pca"},
                            {"dims", pixels.cols},
                            {"metrics", eval::to_json(eval::clustering_report(base.assignments, labels))}};
    }
    log << "cluster accuracy " << report["metrics"]["cluster_accuracy"] << "\n";
    return report;
  }

  if (opts.task == "disentangle") {
    const auto z = eval::encode_all(model, images);
    auto pcc = eval::to_json(eval::pcc_disentanglement(block_matrices(z)));
    pcc.erase("samples");
    report.update(pcc);
    log << "mean off-diagonal PCC " << report["mean_off_diagonal"] << "\n";
    return report;
  }

  if (opts.task == "probe" || opts.task == "attribute") {
    const auto train_all = ds.indices(scene::Split::train);
    const auto n_train = opts.n_train.value_or(cfg.eval.n_train);
    std::vector<std::size_t> train_idx;
    try {
      for (auto p : eval::sample_subset(train_all.size(), n_train, cfg.probe.seed)) train_idx.push_back(train_all[p]);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    const auto train_labels = labels_for(ds, train_idx, opts.label);
    const auto train_images = ds.images(train_idx);

    if (opts.task == "probe") {
      eval::ProbeResult r;
      if (opts.probe_mode == eval::ProbeMode::frozen) {
        r = eval::train_probe(eval::representation_matrix(eval::encode_all(model, train_images), blocks), train_labels,
                              eval::representation_matrix(eval::encode_all(model, images), blocks), labels, cfg.probe);
      } else {
        r = eval::finetune_probe(model, blocks, train_images, train_labels, images, labels, cfg.probe);
      }
      auto j = eval::to_json(r, opts.probe_mode);
      j["label"] = opts.label;
      j["blocks"] = nets::format_blocks(blocks);
      report.update(j);
      log << "probe accuracy " << r.test_accuracy << "\n";
      return report;
    }

    // Attribution over all four blocks of a frozen probe.
    const std::vector<nets::Block> all(nets::kAllBlocks.begin(), nets::kAllBlocks.end());
    const auto probe = eval::train_probe(eval::representation_matrix(eval::encode_all(model, train_images), all),
                                         train_labels, eval::Matrix(0, 0), {}, cfg.probe);
    const auto test_x = eval::representation_matrix(eval::encode_all(model, images), all);
    const auto f = model.architecture().feature_dim;
    const int steps = opts.ig_steps.value_or(cfg.eval.ig_steps);
    const auto samples = std::min<std::size_t>(static_cast<std::size_t>(opts.ig_samples.value_or(cfg.eval.ig_samples)),
                                               idx.size());
    std::array<double, 4> mean_pct{};
    double max_residual = 0.0, max_relative = 0.0;
    io::Json examples = io::Json::array();
    for (std::size_t s = 0; s < samples; ++s) {
      const auto x = test_x.row(static_cast<std::int64_t>(s));
      ad::Tensor<double> xt;
      {
        ad::NoGradGuard no_grad;
        xt = probe.head.logits(ad::Tensor<double>::from({1, test_x.cols}, std::vector<double>(x.begin(), x.end())));
      }
      const auto d = xt.data();
      const auto target = static_cast<std::int64_t>(std::max_element(d.begin(), d.end()) - d.begin());
      const eval::Scorer scorer = [&](const ad::Tensor<double>& z) {
        const auto p = ad::softmax(probe.head.logits(z));
        std::vector<std::int64_t> pick(static_cast<std::size_t>(z.dim(0)), target);
        return ad::gather(p, pick, 1);
      };
      const auto rep = eval::integrated_gradients(scorer, x, {}, steps, {f, f, f, f});
      for (std::size_t b = 0; b < 4; ++b) mean_pct[b] += rep.percent[b] / static_cast<double>(samples);
      max_residual = std::max(max_residual, rep.residual);
      const double delta = std::abs(rep.score - rep.baseline_score);
      if (delta > 0.0) max_relative = std::max(max_relative, rep.residual / delta);
      auto ej = eval::to_json(rep);
      ej.erase("task");
      ej["sample"] = s;
      ej["target_class"] = target;
      examples.push_back(ej);
    }
    report["task"] = "attribute";
    report["label"] = opts.label;
    report["steps"] = steps;
    report["attributed_samples"] = samples;
    report["percent"] = {{"geom", mean_pct[0]}, {"alb", mean_pct[1]}, {"cam", mean_pct[2]}, {"light", mean_pct[3]}};
    report["completeness_residual_max"] = max_residual;
    report["relative_residual_max"] = max_relative;
    report["examples"] = examples;
    log << "attribution geom " << mean_pct[0] << "% alb " << mean_pct[1] << "% cam " << mean_pct[2] << "% light "
        << mean_pct[3] << "%\n";
    return report;
  }

  throw UsageError("unknown eval task '" + opts.task + "' (expected cluster, probe, disentangle, attribute)");
}

// --- render-preview --------------------------------------------------------------

io::Json cmd_render_preview(const PreviewOptions& opts, std::ostream& log) {
  const auto ds = open_dataset(opts.dataset);
  if (opts.index < 0 || static_cast<std::size_t>(opts.index) >= ds.size())
    throw UsageError("--index " + std::to_string(opts.index) + " outside the dataset's " + std::to_string(ds.size()) +
                     " examples");
  ExperimentConfig view_cfg;
  view_cfg.set_image_size(ds.generator.image_size);
  view_cfg.generator = ds.generator;
  const auto renderer = view_cfg.renderer();
  const auto& ranges = ds.generator.ranges;

  SceneParams<float> params;
  std::string source = "ground_truth";
  if (opts.checkpoint) {
    const auto ckpt = open_checkpoint(*opts.checkpoint);
    check_compatible(ckpt, ds);
    const auto model = load_model(ckpt);
    ad::NoGradGuard no_grad;
    const std::vector<std::size_t> one{static_cast<std::size_t>(opts.index)};
    params = model.decode(model.encode(ds.images(one))).detached();
    source = "prediction";
  } else {
    params = ds.scenes[static_cast<std::size_t>(opts.index)].params;
  }

  io::Json warnings = io::Json::array();
  auto apply = [&](ad::Tensor<float>& target, std::size_t k, std::optional<double> value,
                   std::array<double, 2> bounds, const char* name) {
    if (!value) return;
    double v = *value;
    if (v < bounds[0] || v > bounds[1]) {
      const double c = std::clamp(v, bounds[0], bounds[1]);
      std::ostringstream msg;
      msg << "warning: " << name << " override " << v << " outside [" << bounds[0] << ", " << bounds[1]
          << "], clamped to " << c;
      log << msg.str() << "\n";
      warnings.push_back(msg.str());
      v = c;
    }
    auto copy = target.clone();
    copy.mutable_data()[static_cast<std::size_t>(k)] = static_cast<float>(v);
    target = copy;
  };
  auto overridden = params.detached();
  overridden.light = overridden.light.clone();
  overridden.camera = overridden.camera.clone();
  const char* camera_names[6] = {"rx", "ry", "rz", "tx", "ty", "tz"};
  const char* light_names[4] = {"ambient", "diffuse", "light_pitch", "light_yaw"};
  for (std::size_t k = 0; k < 6; ++k)
    apply(overridden.camera, k, opts.camera[k], ranges.camera_bounds(static_cast<int>(k)), camera_names[k]);
  for (std::size_t k = 0; k < 4; ++k)
    apply(overridden.light, k, opts.light[k], ranges.light_bounds(static_cast<int>(k)), light_names[k]);

  ensure_dir(opts.out);
  ad::NoGradGuard no_grad;
  const auto base = renderer(params);
  const auto moved = renderer(overridden);
  const auto s = ds.generator.image_size;
  io::write_png(opts.out / "canonical.png", s, s, base.data());
  io::save_tensor(opts.out / "canonical.pdrt", ad::reshape(base, {s, s, 3}));
  io::write_png(opts.out / "override.png", s, s, moved.data());
  io::save_tensor(opts.out / "override.pdrt", ad::reshape(moved, {s, s, 3}));
  const auto [lo, hi] = std::minmax_element(moved.data().begin(), moved.data().end());
  log << "wrote " << (opts.out / "canonical.png").string() << " and " << (opts.out / "override.png").string() << "\n";
  const auto l = overridden.light.data();
  const auto c = overridden.camera.data();
  return {{"command", "render-preview"},
          {"source", source},
          {"index", opts.index},
          {"files", {"canonical.png", "canonical.pdrt", "override.png", "override.pdrt"}},
          {"light", std::vector<double>(l.begin(), l.end())},
          {"camera", std::vector<double>(c.begin(), c.end())},
          {"value_range", {*lo, *hi}},
          {"warnings", warnings}};
}

}  // namespace pdr::app
