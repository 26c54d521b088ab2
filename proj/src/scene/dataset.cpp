// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pdr/scene/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <system_error>

#include "pdr/ad/ops.hpp"
#include "pdr/ad/parallel.hpp"
#include "pdr/io/pdrt.hpp"

namespace pdr {

void to_json(io::Json& j, const ParamRanges& r) {
  j = io::Json{{"standoff", r.standoff},
               {"depth_band", r.depth_band},
               {"max_light_angle", r.max_light_angle},
               {"max_camera_rotation", r.max_camera_rotation},
               {"max_camera_translation", r.max_camera_translation}};
}

void from_json(const io::Json& j, ParamRanges& r) {
  constexpr auto ctx = "ranges";
  io::check_keys(j, {"standoff", "depth_band", "max_light_angle", "max_camera_rotation", "max_camera_translation"}, ctx);
  io::read_opt(j, "standoff", r.standoff, ctx);
  io::read_opt(j, "depth_band", r.depth_band, ctx);
  io::read_opt(j, "max_light_angle", r.max_light_angle, ctx);
  io::read_opt(j, "max_camera_rotation", r.max_camera_rotation, ctx);
  io::read_opt(j, "max_camera_translation", r.max_camera_translation, ctx);
}

}  // namespace pdr

namespace pdr::render {

void to_json(io::Json& j, const RenderConfig& c) {
  j = io::Json{{"splat_sigma", c.splat_sigma},
               {"coverage_eps", c.coverage_eps},
               {"background", c.background},
               {"standoff", c.standoff}};
}

void from_json(const io::Json& j, RenderConfig& c) {
  constexpr auto ctx = "render";
  io::check_keys(j, {"splat_sigma", "coverage_eps", "background", "standoff"}, ctx);
  io::read_opt(j, "splat_sigma", c.splat_sigma, ctx);
  io::read_opt(j, "coverage_eps", c.coverage_eps, ctx);
  io::read_opt(j, "background", c.background, ctx);
  io::read_opt(j, "standoff", c.standoff, ctx);
}

}  // namespace pdr::render

namespace pdr::scene {

namespace fs = std::filesystem;

std::string_view split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

Split parse_split(std::string_view name) {
  for (auto s : {Split::train, Split::val, Split::test})
    if (split_name(s) == name) return s;
  throw std::invalid_argument("unknown split '" + std::string(name) + "'");
}

void SplitFractions::check() const {
  if (train < 0 || val < 0 || test < 0) throw std::invalid_argument("split fractions must be non-negative");
  if (std::abs(train + val + test - 1.0) > 1e-9) throw std::invalid_argument("split fractions must sum to 1");
}

void to_json(io::Json& j, const GeneratorConfig& c) {
  j = io::Json{{"image_size", c.image_size},
               {"num_shape_classes", c.num_shape_classes},
               {"num_albedo_classes", c.num_albedo_classes},
               {"ranges", c.ranges},
               {"render", c.render},
               {"fov_degrees", c.fov_degrees},
               {"canonical_light", c.canonical_light},
               {"light_delta", c.light_delta},
               {"camera_pitch_delta", c.camera_pitch_delta},
               {"camera_yaw_delta", c.camera_yaw_delta}};
}

void from_json(const io::Json& j, GeneratorConfig& c) {
  constexpr auto ctx = "generator";
  io::check_keys(j,
                 {"image_size", "num_shape_classes", "num_albedo_classes", "ranges", "render", "fov_degrees",
                  "canonical_light", "light_delta", "camera_pitch_delta", "camera_yaw_delta"},
                 ctx);
  io::read_opt(j, "image_size", c.image_size, ctx);
  io::read_opt(j, "num_shape_classes", c.num_shape_classes, ctx);
  io::read_opt(j, "num_albedo_classes", c.num_albedo_classes, ctx);
  if (j.contains("ranges")) from_json(j.at("ranges"), c.ranges);
  if (j.contains("render")) render::from_json(j.at("render"), c.render);
  io::read_opt(j, "fov_degrees", c.fov_degrees, ctx);
  io::read_opt(j, "canonical_light", c.canonical_light, ctx);
  io::read_opt(j, "light_delta", c.light_delta, ctx);
  io::read_opt(j, "camera_pitch_delta", c.camera_pitch_delta, ctx);
  io::read_opt(j, "camera_yaw_delta", c.camera_yaw_delta, ctx);
}

void to_json(io::Json& j, const SplitFractions& f) { j = io::Json{{"train", f.train}, {"val", f.val}, {"test", f.test}}; }

void from_json(const io::Json& j, SplitFractions& f) {
  constexpr auto ctx = "split";
  io::check_keys(j, {"train", "val", "test"}, ctx);
  io::read_opt(j, "train", f.train, ctx);
  io::read_opt(j, "val", f.val, ctx);
  io::read_opt(j, "test", f.test, ctx);
}

// --- Dataset accessors -------------------------------------------------------

std::vector<std::size_t> Dataset::indices(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < entries.size(); ++i)
    if (entries[i].split == s) out.push_back(i);
  return out;
}

ad::Tensor<float> Dataset::images(std::span<const std::size_t> idx) const {
  const auto s = generator.image_size;
  const auto per = static_cast<std::size_t>(s * s * 3);
  std::vector<float> out;
  out.reserve(idx.size() * per);
  for (auto i : idx) {
    const auto d = scenes.at(i).image.data();
    out.insert(out.end(), d.begin(), d.end());
  }
  return ad::Tensor<float>::from({static_cast<std::int64_t>(idx.size()), s, s, 3}, std::move(out));
}

SceneParams<float> Dataset::params(std::span<const std::size_t> idx) const {
  std::vector<SceneParams<float>> parts;
  parts.reserve(idx.size());
  for (auto i : idx) parts.push_back(scenes.at(i).params);
  return stack(parts);
}

std::vector<int> Dataset::shape_labels(std::span<const std::size_t> idx) const {
  std::vector<int> out;
  for (auto i : idx) out.push_back(entries.at(i).shape_class);
  return out;
}

std::vector<int> Dataset::albedo_labels(std::span<const std::size_t> idx) const {
  std::vector<int> out;
  for (auto i : idx) out.push_back(entries.at(i).albedo_class);
  return out;
}

// --- Splitting -----------------------------------------------------------------

std::vector<Split> stratified_split(std::span<const int> labels, int num_labels, const SplitFractions& fractions,
                                    Rng& rng) {
  fractions.check();
  const auto n = static_cast<std::int64_t>(labels.size());
  const std::array<double, 3> frac{fractions.train, fractions.val, fractions.test};
  std::array<std::int64_t, 3> target{};
  target[0] = std::llround(static_cast<double>(n) * frac[0]);
  target[1] = std::min(n - target[0], static_cast<std::int64_t>(std::llround(static_cast<double>(n) * frac[1])));
  target[2] = n - target[0] - target[1];

  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(num_labels));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= num_labels) throw std::invalid_argument("stratified_split: label out of range");
    members[static_cast<std::size_t>(labels[i])].push_back(i);
  }

  // Floor allocation, then hand out the remainders.
  std::vector<std::array<std::int64_t, 3>> alloc(members.size());
  std::array<std::int64_t, 3> deficit = target;
  std::vector<std::int64_t> leftover(members.size());
  for (std::size_t c = 0; c < members.size(); ++c) {
    const auto m = static_cast<double>(members[c].size());
    std::int64_t used = 0;
    for (int s = 0; s < 3; ++s) {
      alloc[c][s] = static_cast<std::int64_t>(std::floor(m * frac[s]));
      used += alloc[c][s];
      deficit[s] -= alloc[c][s];
    }
    leftover[c] = static_cast<std::int64_t>(members[c].size()) - used;
  }
  std::vector<std::size_t> order(members.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return leftover[a] > leftover[b]; });
  for (auto c : order) {
    std::array<bool, 3> used{};
    while (leftover[c] > 0) {
      // Largest remaining deficit among splits this label has not topped up yet.
      int best = -1;
      for (int pass = 0; pass < 2 && best < 0; ++pass) {
        for (int s = 0; s < 3; ++s) {
          if (deficit[s] <= 0 || (pass == 0 && used[s])) continue;
          if (best < 0 || deficit[s] > deficit[best]) best = s;
        }
      }
      if (best < 0) throw std::logic_error("stratified_split: allocation does not balance");
      used[best] = true;
      ++alloc[c][best];
      --deficit[best];
      --leftover[c];
    }
  }

  std::vector<Split> out(labels.size(), Split::train);
  for (std::size_t c = 0; c < members.size(); ++c) {
    auto& m = members[c];
    for (std::size_t i = m.size(); i > 1; --i) std::swap(m[i - 1], m[rng.below(i)]);
    std::size_t k = 0;
    for (int s = 0; s < 3; ++s)
      for (std::int64_t r = 0; r < alloc[c][s]; ++r) out[m[k++]] = static_cast<Split>(s);
  }
  return out;
}

Dataset build_dataset(std::int64_t n, const SplitFractions& fractions, std::uint64_t seed, const GeneratorConfig& cfg) {
  if (n < 10) throw std::invalid_argument("build_dataset: n must be at least 10");
  fractions.check();
  cfg.check();
  Dataset ds;
  ds.generator = cfg;
  ds.fractions = fractions;
  ds.seed = seed;
  ds.entries.resize(static_cast<std::size_t>(n));
  Rng label_rng(seed);
  std::vector<int> shapes(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    auto& e = ds.entries[static_cast<std::size_t>(i)];
    e.seed = mix_seed(seed, static_cast<std::uint64_t>(i));
    e.shape_class = static_cast<int>(label_rng.below(static_cast<std::uint64_t>(cfg.num_shape_classes)));
    e.albedo_class = static_cast<int>(label_rng.below(static_cast<std::uint64_t>(cfg.num_albedo_classes)));
    shapes[static_cast<std::size_t>(i)] = e.shape_class;
  }
  Rng split_rng = label_rng.fork(0x5eed);
  const auto splits = stratified_split(shapes, cfg.num_shape_classes, fractions, split_rng);
  for (std::size_t i = 0; i < splits.size(); ++i) ds.entries[i].split = splits[i];

  ds.scenes.resize(static_cast<std::size_t>(n));
  ad::parallel_for(n, [&](std::int64_t i) {
    const auto& e = ds.entries[static_cast<std::size_t>(i)];
    ds.scenes[static_cast<std::size_t>(i)] = generate_scene<float>(e.seed, e.shape_class, e.albedo_class, cfg);
  });
  return ds;
}

// --- Persistence ---------------------------------------------------------------

namespace {

constexpr int kManifestVersion = 1;
constexpr std::array<const char*, 5> kFields{"image", "depth", "albedo", "light", "camera"};

std::string example_file(std::size_t i, const char* field) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "examples/%06zu_%s.pdrt", i, field);
  return buf;
}

const ad::Tensor<float>& field_tensor(const LabeledScene<float>& s, int f) {
  switch (f) {
    case 0: return s.image;
    case 1: return s.params.depth;
    case 2: return s.params.albedo;
    case 3: return s.params.light;
    default: return s.params.camera;
  }
}

}  // namespace

void save_dataset(const fs::path& dir, const Dataset& ds) {
  std::error_code ec;
  fs::create_directories(dir / "examples", ec);
  if (ec) throw std::runtime_error("cannot create dataset directory " + (dir / "examples").string() + ": " + ec.message());

  io::Json examples = io::Json::array();
  for (std::size_t i = 0; i < ds.entries.size(); ++i) {
    const auto& e = ds.entries[i];
    io::Json files = io::Json::object();
    for (int f = 0; f < static_cast<int>(kFields.size()); ++f) {
      const auto name = example_file(i, kFields[f]);
      io::save_tensor(dir / name, field_tensor(ds.scenes[i], f));
      files[kFields[f]] = name;
    }
    examples.push_back({{"index", i},
                        {"seed", e.seed},
                        {"shape_class", e.shape_class},
                        {"albedo_class", e.albedo_class},
                        {"split", split_name(e.split)},
                        {"files", files}});
  }
  io::Json counts = io::Json::object();
  for (auto s : {Split::train, Split::val, Split::test})
    counts[std::string(split_name(s))] = ds.indices(s).size();
  const io::Json manifest{{"version", kManifestVersion},
                          {"seed", ds.seed},
                          {"size", ds.entries.size()},
                          {"precision", "f32"},
                          {"split_fractions", ds.fractions},
                          {"split_counts", counts},
                          {"generator", ds.generator},
                          {"examples", examples}};
  io::write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

Dataset load_dataset(const fs::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  io::Json m;
  try {
    m = io::Json::parse(io::read_text(manifest_path));
  } catch (const io::Json::parse_error& e) {
    throw std::runtime_error("malformed manifest " + manifest_path.string() + ": " + e.what());
  }
  if (m.value("version", 0) != kManifestVersion)
    throw std::runtime_error("unsupported manifest version in " + manifest_path.string());
  Dataset ds;
  try {
    ds.seed = m.at("seed").get<std::uint64_t>();
    from_json(m.at("split_fractions"), ds.fractions);
    from_json(m.at("generator"), ds.generator);
    for (const auto& ex : m.at("examples")) {
      DatasetEntry e;
      e.seed = ex.at("seed").get<std::uint64_t>();
      e.shape_class = ex.at("shape_class").get<int>();
      e.albedo_class = ex.at("albedo_class").get<int>();
      e.split = parse_split(ex.at("split").get<std::string>());
      ds.entries.push_back(e);
      LabeledScene<float> s;
      const auto& files = ex.at("files");
      s.image = io::load_tensor<float>(dir / files.at("image").get<std::string>());
      s.params.depth = io::load_tensor<float>(dir / files.at("depth").get<std::string>());
      s.params.albedo = io::load_tensor<float>(dir / files.at("albedo").get<std::string>());
      s.params.light = io::load_tensor<float>(dir / files.at("light").get<std::string>());
      s.params.camera = io::load_tensor<float>(dir / files.at("camera").get<std::string>());
      s.shape_class = e.shape_class;
      s.albedo_class = e.albedo_class;
      s.seed = e.seed;
      ds.scenes.push_back(std::move(s));
    }
  } catch (const io::Json::exception& e) {
    throw std::runtime_error("malformed manifest " + manifest_path.string() + ": " + e.what());
  }
  return ds;
}

}  // namespace pdr::scene
