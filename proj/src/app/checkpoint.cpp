// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pdr/app/checkpoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <system_error>

#include "pdr/io/pdrt.hpp"

namespace pdr::app {

namespace fs = std::filesystem;

namespace {

constexpr int kCheckpointVersion = 1;

io::Json finite_or_null(double v) { return std::isfinite(v) ? io::Json(v) : io::Json(nullptr); }

double number_or_inf(const io::Json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

}  // namespace

Checkpoint capture(loocc::Trainer& trainer, const ExperimentConfig& config, double val_recon) {
  Checkpoint c;
  c.config = config;
  c.epoch = trainer.epoch();
  c.val_recon = val_recon;
  c.best_val = trainer.early_stopping().best;
  c.best_epoch = trainer.early_stopping().best_epoch;
  c.bad_epochs = trainer.early_stopping().bad_epochs;
  c.rng_state = trainer.rng().state();
  c.adam_steps = trainer.optimizer().steps();
  for (const auto& [name, t] : trainer.model().named_parameters()) c.params.emplace_back(name, t.clone());
  c.adam_m = trainer.optimizer().first_moments();
  c.adam_v = trainer.optimizer().second_moments();
  return c;
}

void assign_parameters(nets::InverseRenderer<float>& model, const nets::NamedParams<float>& values) {
  std::map<std::string, const ad::Tensor<float>*> by_name;
  for (const auto& [name, t] : values) by_name[name] = &t;
  for (auto& [name, t] : model.named_parameters()) {
    const auto it = by_name.find(name);
    if (it == by_name.end()) throw UsageError("checkpoint lacks parameter " + name);
    if (it->second->shape() != t.shape())
      throw UsageError("checkpoint parameter " + name + " has shape " + ad::shape_str(it->second->shape()) +
                       ", model expects " + ad::shape_str(t.shape()));
    auto dst = t.mutable_data();
    const auto src = it->second->data();
    std::copy(src.begin(), src.end(), dst.begin());
  }
}

void restore(loocc::Trainer& trainer, const Checkpoint& ckpt) {
  assign_parameters(trainer.model(), ckpt.params);
  auto& m = trainer.optimizer().first_moments();
  auto& v = trainer.optimizer().second_moments();
  if (ckpt.adam_m.size() != m.size() || ckpt.adam_v.size() != v.size())
    throw UsageError("checkpoint optimizer state does not match the model");
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (ckpt.adam_m[k].size() != m[k].size() || ckpt.adam_v[k].size() != v[k].size())
      throw UsageError("checkpoint optimizer state does not match the model");
    m[k] = ckpt.adam_m[k];
    v[k] = ckpt.adam_v[k];
  }
  trainer.optimizer().set_steps(ckpt.adam_steps);
  trainer.rng().set_state(ckpt.rng_state);
  auto& es = trainer.early_stopping();
  es.best = ckpt.best_val;
  es.best_epoch = ckpt.best_epoch;
  es.bad_epochs = ckpt.bad_epochs;
  trainer.set_epoch(ckpt.epoch);
}

void save_checkpoint(const fs::path& dir, const Checkpoint& c) {
  std::error_code ec;
  for (const char* sub : {"tensors", "adam"}) {
    fs::create_directories(dir / sub, ec);
    if (ec) throw std::runtime_error("cannot create checkpoint directory " + (dir / sub).string() + ": " + ec.message());
  }
  io::Json params = io::Json::array();
  for (std::size_t k = 0; k < c.params.size(); ++k) {
    const auto& [name, t] = c.params[k];
    const std::string file = "tensors/" + name + ".pdrt";
    const std::string mfile = "adam/" + name + ".m.pdrt";
    const std::string vfile = "adam/" + name + ".v.pdrt";
    io::save_tensor(dir / file, t);
    io::write_pdrt(dir / mfile, t.shape(), std::span<const float>(c.adam_m.at(k)));
    io::write_pdrt(dir / vfile, t.shape(), std::span<const float>(c.adam_v.at(k)));
    params.push_back({{"name", name}, {"shape", t.shape()}, {"file", file}, {"adam_m", mfile}, {"adam_v", vfile}});
  }
  const io::Json j{{"version", kCheckpointVersion},
                   {"mode", loocc::mode_name(c.config.loocc.mode)},
                   {"epoch", c.epoch},
                   {"val_recon", finite_or_null(c.val_recon)},
                   {"best_val", finite_or_null(c.best_val)},
                   {"best_epoch", c.best_epoch},
                   {"bad_epochs", c.bad_epochs},
                   {"rng_state", c.rng_state},
                   {"adam_steps", c.adam_steps},
                   {"config", to_json(c.config)},
                   {"parameters", params}};
  io::write_text(dir / "checkpoint.json", j.dump(2) + "\n");
}

Checkpoint load_checkpoint(const fs::path& dir) {
  const auto path = dir / "checkpoint.json";
  io::Json j;
  try {
    j = io::Json::parse(io::read_text(path));
  } catch (const io::Json::parse_error& e) {
    throw std::runtime_error("malformed checkpoint " + path.string() + ": " + e.what());
  }
  Checkpoint c;
  try {
    if (j.at("version").get<int>() != kCheckpointVersion)
      throw std::runtime_error("unsupported checkpoint version in " + path.string());
    c.config = config_from_json(j.at("config"));
    c.epoch = j.at("epoch").get<int>();
    c.val_recon = number_or_inf(j.at("val_recon"));
    c.best_val = number_or_inf(j.at("best_val"));
    c.best_epoch = j.at("best_epoch").get<int>();
    c.bad_epochs = j.at("bad_epochs").get<int>();
    c.rng_state = j.at("rng_state").get<std::string>();
    c.adam_steps = j.at("adam_steps").get<std::int64_t>();
    for (const auto& p : j.at("parameters")) {
      const auto name = p.at("name").get<std::string>();
      c.params.emplace_back(name, io::load_tensor<float>(dir / p.at("file").get<std::string>()));
      c.adam_m.push_back(io::read_pdrt(dir / p.at("adam_m").get<std::string>()).as<float>());
      c.adam_v.push_back(io::read_pdrt(dir / p.at("adam_v").get<std::string>()).as<float>());
    }
  } catch (const io::Json::exception& e) {
    throw std::runtime_error("malformed checkpoint " + path.string() + ": " + e.what());
  }
  return c;
}

nets::InverseRenderer<float> load_model(const Checkpoint& ckpt) {
  nets::InverseRenderer<float> model(ckpt.config.model, ckpt.config.generator.ranges, ckpt.config.seeds.init);
  assign_parameters(model, ckpt.params);
  return model;
}

}  // namespace pdr::app
