// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pdr/app/config.hpp"

#include "pdr/io/pdrt.hpp"

namespace pdr::loocc {

void to_json(io::Json& j, const LooccConfig& c) {
  j = io::Json{{"mode", mode_name(c.mode)},
               {"temperature", c.temperature},
               {"alpha", c.alpha},
               {"beta", c.beta},
               {"batch_size", c.batch_size},
               {"learning_rate", c.learning_rate},
               {"patience", c.patience},
               {"max_epochs", c.max_epochs},
               {"detach_aug", c.detach_aug},
               {"perturb",
                {{"light", c.perturb.light},
                 {"camera_pitch", c.perturb.camera_pitch},
                 {"camera_yaw", c.perturb.camera_yaw}}}};
}

void from_json(const io::Json& j, LooccConfig& c) {
  constexpr auto ctx = "loocc";
  io::check_keys(j,
                 {"mode", "temperature", "alpha", "beta", "batch_size", "learning_rate", "patience", "max_epochs",
                  "detach_aug", "perturb"},
                 ctx);
  if (j.contains("mode")) c.mode = parse_mode(j.at("mode").get<std::string>());
  io::read_opt(j, "temperature", c.temperature, ctx);
  io::read_opt(j, "alpha", c.alpha, ctx);
  io::read_opt(j, "beta", c.beta, ctx);
  io::read_opt(j, "batch_size", c.batch_size, ctx);
  io::read_opt(j, "learning_rate", c.learning_rate, ctx);
  io::read_opt(j, "patience", c.patience, ctx);
  io::read_opt(j, "max_epochs", c.max_epochs, ctx);
  io::read_opt(j, "detach_aug", c.detach_aug, ctx);
  if (j.contains("perturb")) {
    const auto& p = j.at("perturb");
    io::check_keys(p, {"light", "camera_pitch", "camera_yaw"}, "loocc.perturb");
    io::read_opt(p, "light", c.perturb.light, "loocc.perturb");
    io::read_opt(p, "camera_pitch", c.perturb.camera_pitch, "loocc.perturb");
    io::read_opt(p, "camera_yaw", c.perturb.camera_yaw, "loocc.perturb");
  }
}

}  // namespace pdr::loocc

namespace pdr::app {

namespace {

io::Json model_json(const nets::Architecture& a) {
  return {{"encoder_widths", a.encoder_widths}, {"decoder_widths", a.decoder_widths}, {"mlp_hidden", a.mlp_hidden}};
}

void read_model(const io::Json& j, nets::Architecture& a) {
  constexpr auto ctx = "model";
  io::check_keys(j, {"encoder_widths", "decoder_widths", "mlp_hidden"}, ctx);
  io::read_opt(j, "encoder_widths", a.encoder_widths, ctx);
  io::read_opt(j, "decoder_widths", a.decoder_widths, ctx);
  io::read_opt(j, "mlp_hidden", a.mlp_hidden, ctx);
}

io::Json probe_json(const eval::ProbeConfig& p) {
  return {{"epochs", p.epochs},
          {"learning_rate", p.learning_rate},
          {"batch_size", p.batch_size},
          {"hidden", p.hidden},
          {"seed", p.seed}};
}

void read_probe(const io::Json& j, eval::ProbeConfig& p) {
  constexpr auto ctx = "probe";
  io::check_keys(j, {"epochs", "learning_rate", "batch_size", "hidden", "seed"}, ctx);
  io::read_opt(j, "epochs", p.epochs, ctx);
  io::read_opt(j, "learning_rate", p.learning_rate, ctx);
  io::read_opt(j, "batch_size", p.batch_size, ctx);
  io::read_opt(j, "hidden", p.hidden, ctx);
  io::read_opt(j, "seed", p.seed, ctx);
}

}  // namespace

void ExperimentConfig::check() const {
  try {
    model.check();
    generator.check();
    split.check();
    loocc.check();
    probe.check();
    nets::parse_blocks(eval.blocks);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("invalid config: ") + e.what());
  }
  if (generator.image_size != model.image_size) throw UsageError("invalid config: generator and model image sizes differ");
  if (dataset_size < 10) throw UsageError("invalid config: dataset.size must be at least 10");
  if (eval.n_train < 1) throw UsageError("invalid config: eval.n_train must be positive");
  if (eval.ig_steps < 1 || eval.ig_samples < 1) throw UsageError("invalid config: eval.ig_steps and ig_samples must be positive");
}

render::Renderer ExperimentConfig::renderer() const {
  render::Renderer r;
  r.intrinsics = render::CameraIntrinsics::from_fov(generator.image_size, generator.fov_degrees);
  r.config = generator.render;
  r.config.standoff = generator.ranges.standoff;
  return r;
}

io::Json to_json(const ExperimentConfig& c) {
  io::Json gen = c.generator;
  gen.erase("image_size");
  return {{"image_size", c.model.image_size},
          {"feature_dim", c.model.feature_dim},
          {"model", model_json(c.model)},
          {"generator", gen},
          {"dataset", {{"size", c.dataset_size}, {"split", c.split}}},
          {"loocc", c.loocc},
          {"probe", probe_json(c.probe)},
          {"eval",
           {{"blocks", c.eval.blocks},
            {"n_train", c.eval.n_train},
            {"ig_steps", c.eval.ig_steps},
            {"ig_samples", c.eval.ig_samples}}},
          {"seeds", {{"data", c.seeds.data}, {"init", c.seeds.init}, {"train", c.seeds.train}}},
          {"output_dir", c.output_dir}};
}

ExperimentConfig config_from_json(const io::Json& j) {
  ExperimentConfig c;
  try {
    constexpr auto ctx = "config";
    io::check_keys(j,
                   {"image_size", "feature_dim", "model", "generator", "dataset", "loocc", "probe", "eval", "seeds",
                    "output_dir"},
                   ctx);
    if (j.contains("model")) read_model(j.at("model"), c.model);
    if (j.contains("generator")) {
      if (j.at("generator").contains("image_size"))
        throw std::invalid_argument("generator.image_size is set through the top-level image_size");
      scene::from_json(j.at("generator"), c.generator);
    }
    std::int64_t size = c.model.image_size;
    io::read_opt(j, "image_size", size, ctx);
    c.set_image_size(size);
    io::read_opt(j, "feature_dim", c.model.feature_dim, ctx);
    if (j.contains("dataset")) {
      const auto& d = j.at("dataset");
      io::check_keys(d, {"size", "split"}, "dataset");
      io::read_opt(d, "size", c.dataset_size, "dataset");
      if (d.contains("split")) scene::from_json(d.at("split"), c.split);
    }
    if (j.contains("loocc")) from_json(j.at("loocc"), c.loocc);
    if (j.contains("probe")) read_probe(j.at("probe"), c.probe);
    if (j.contains("eval")) {
      const auto& e = j.at("eval");
      io::check_keys(e, {"blocks", "n_train", "ig_steps", "ig_samples"}, "eval");
      io::read_opt(e, "blocks", c.eval.blocks, "eval");
      io::read_opt(e, "n_train", c.eval.n_train, "eval");
      io::read_opt(e, "ig_steps", c.eval.ig_steps, "eval");
      io::read_opt(e, "ig_samples", c.eval.ig_samples, "eval");
    }
    if (j.contains("seeds")) {
      const auto& s = j.at("seeds");
      io::check_keys(s, {"data", "init", "train"}, "seeds");
      io::read_opt(s, "data", c.seeds.data, "seeds");
      io::read_opt(s, "init", c.seeds.init, "seeds");
      io::read_opt(s, "train", c.seeds.train, "seeds");
    }
    io::read_opt(j, "output_dir", c.output_dir, ctx);
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("invalid config: ") + e.what());
  } catch (const io::Json::exception& e) {
    throw UsageError(std::string("invalid config: ") + e.what());
  }
  c.check();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_text(path);
  } catch (const std::runtime_error& e) {
    throw UsageError(e.what());
  }
  io::Json j;
  try {
    j = io::Json::parse(text);
  } catch (const io::Json::parse_error& e) {
    throw UsageError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace pdr::app
