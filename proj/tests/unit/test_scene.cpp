#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "pdr/io/pdrt.hpp"
#include "pdr/scene/dataset.hpp"
#include "pdr/scene/generator.hpp"

namespace fs = std::filesystem;
using namespace pdr;
using namespace pdr::scene;

namespace {

GeneratorConfig small_config(std::int64_t size = 16) {
  GeneratorConfig c;
  c.image_size = size;
  return c;
}

fs::path fresh_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("pdr_unit_" + name);
  fs::remove_all(p);
  return p;
}

template <class T>
bool same(const ad::Tensor<T>& a, const ad::Tensor<T>& b) {
  return a.shape() == b.shape() && std::equal(a.data().begin(), a.data().end(), b.data().begin());
}

}  // namespace

TEST_CASE("generate_scene is deterministic") {
  const auto cfg = small_config(24);
  for (int shape = 0; shape < 5; ++shape) {
    auto a = generate_scene<float>(1234 + shape, shape, shape % 4, cfg);
    auto b = generate_scene<float>(1234 + shape, shape, shape % 4, cfg);
    CHECK(same(a.image, b.image));
    CHECK(same(a.params.depth, b.params.depth));
    CHECK(same(a.params.albedo, b.params.albedo));
    CHECK(same(a.params.light, b.params.light));
    CHECK(same(a.params.camera, b.params.camera));
  }
}

TEST_CASE("generated scenes respect the parameter ranges") {
  const auto cfg = small_config(16);
  for (std::uint64_t s = 0; s < 60; ++s) {
    auto sc = generate_scene<double>(s, static_cast<int>(s % 5), static_cast<int>(s % 4), cfg);
    for (double d : sc.params.depth.data()) {
      CHECK(d >= 0.9);
      CHECK(d <= 1.1);
    }
    for (double a : sc.params.albedo.data()) {
      CHECK(a >= 0.0);
      CHECK(a <= 1.0);
    }
    CHECK_NOTHROW(validate(sc.params, cfg.ranges));
    for (double v : sc.image.data()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("shape classes are drawn uniformly") {
  auto ds = build_dataset(1000, {}, 77, small_config(8));
  std::array<int, 5> counts{};
  for (const auto& e : ds.entries) ++counts[static_cast<std::size_t>(e.shape_class)];
  for (int c : counts) {
    CHECK(c >= 150);
    CHECK(c <= 250);
  }
}

TEST_CASE("100 examples split 80/10/10 into a partition") {
  auto ds = build_dataset(100, {}, 5, small_config(8));
  auto tr = ds.indices(Split::train), va = ds.indices(Split::val), te = ds.indices(Split::test);
  CHECK(tr.size() == 80);
  CHECK(va.size() == 10);
  CHECK(te.size() == 10);
  std::set<std::uint64_t> seen;
  for (auto* part : {&tr, &va, &te})
    for (auto i : *part) CHECK(seen.insert(ds.entries[i].seed).second);
  CHECK(seen.size() == ds.size());
}

TEST_CASE("splits are stratified by shape class") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto ds = build_dataset(237, {}, seed, small_config(8));
    std::array<int, 5> global{};
    std::array<std::array<int, 5>, 3> per{};
    for (const auto& e : ds.entries) {
      ++global[static_cast<std::size_t>(e.shape_class)];
      ++per[static_cast<std::size_t>(e.split)][static_cast<std::size_t>(e.shape_class)];
    }
    const std::array<double, 3> frac{0.8, 0.1, 0.1};
    for (int s = 0; s < 3; ++s)
      for (int c = 0; c < 5; ++c) CHECK(std::abs(per[s][c] - frac[s] * global[c]) <= 1.0);
  }
}

TEST_CASE("stratified_split honours the rounded split sizes") {
  Rng rng(3);
  std::vector<int> labels;
  for (int i = 0; i < 57; ++i) labels.push_back(i % 4);
  auto splits = stratified_split(labels, 4, {}, rng);
  std::array<int, 3> n{};
  for (auto s : splits) ++n[static_cast<std::size_t>(s)];
  CHECK(n[0] == 46);  // round(45.6)
  CHECK(n[1] == 6);   // round(5.7)
  CHECK(n[2] == 5);
}

TEST_CASE("datasets round-trip through disk bit-exactly and regenerate from the manifest") {
  const auto cfg = small_config(12);
  auto ds = build_dataset(20, {}, 9, cfg);
  const auto dir = fresh_dir("dataset");
  save_dataset(dir, ds);
  auto back = load_dataset(dir);
  REQUIRE(back.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.entries[i].seed == ds.entries[i].seed);
    CHECK(back.entries[i].split == ds.entries[i].split);
    CHECK(same(back.scenes[i].image, ds.scenes[i].image));
    CHECK(same(back.scenes[i].params.depth, ds.scenes[i].params.depth));
    CHECK(same(back.scenes[i].params.albedo, ds.scenes[i].params.albedo));
    CHECK(same(back.scenes[i].params.light, ds.scenes[i].params.light));
    CHECK(same(back.scenes[i].params.camera, ds.scenes[i].params.camera));
    auto regen = generate_scene<float>(ds.entries[i].seed, ds.entries[i].shape_class, ds.entries[i].albedo_class,
                                       back.generator);
    CHECK(same(regen.image, back.scenes[i].image));
  }
  fs::remove_all(dir);
}

TEST_CASE("dataset files are byte-identical across rebuilds") {
  const auto cfg = small_config(12);
  const auto a = fresh_dir("ds_a"), b = fresh_dir("ds_b");
  save_dataset(a, build_dataset(15, {}, 4, cfg));
  save_dataset(b, build_dataset(15, {}, 4, cfg));
  std::size_t files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), a);
    CHECK(io::read_bytes(entry.path()) == io::read_bytes(b / rel));
    ++files;
  }
  CHECK(files > 15);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("invalid dataset requests are rejected") {
  CHECK_THROWS(build_dataset(5, {}, 1, small_config(8)));
  SplitFractions bad{0.5, 0.1, 0.1};
  CHECK_THROWS(bad.check());
  CHECK_THROWS(load_dataset(fresh_dir("missing")));
  CHECK_THROWS(parse_split("holdout"));
}

TEST_CASE("PDRT containers round-trip in both precisions") {
  const ad::Shape shape{2, 3, 1};
  std::vector<float> f{1.5f, -2.f, 0.f, 3.25f, 1e-8f, -0.f};
  std::vector<double> d{1.0 / 3.0, -2.0, 0.0, 1e300, 1e-300, -0.0};
  auto pf = io::decode_pdrt(io::encode_pdrt(shape, std::span<const float>(f)));
  auto pd = io::decode_pdrt(io::encode_pdrt(shape, std::span<const double>(d)));
  CHECK(pf.shape == shape);
  CHECK(pf.dtype() == io::DType::f32);
  CHECK(pf.as<float>() == f);
  CHECK(pd.dtype() == io::DType::f64);
  CHECK(pd.as<double>() == d);
  auto bytes = io::encode_pdrt(shape, std::span<const float>(f));
  bytes.resize(bytes.size() - 1);
  CHECK_THROWS(io::decode_pdrt(bytes));
}
