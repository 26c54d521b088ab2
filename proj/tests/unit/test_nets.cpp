#include <doctest.h>

#include <cmath>
#include <set>

#include "pdr/ad/ops.hpp"
#include "pdr/nets/model.hpp"
#include "pdr/render/renderer.hpp"

using namespace pdr;
using namespace pdr::nets;
using TF = ad::Tensor<float>;

namespace {

Architecture tiny_arch(std::int64_t size = 16) {
  Architecture a;
  a.image_size = size;
  a.feature_dim = 8;
  a.encoder_widths = {4, 8};
  a.decoder_widths = {8, 4};
  a.mlp_hidden = 8;
  return a;
}

TF random_images(std::int64_t n, std::int64_t s, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<float> v(static_cast<std::size_t>(n * s * s * 3));
  for (auto& x : v) x = static_cast<float>(rng.uniform());
  return TF::from({n, s, s, 3}, std::move(v));
}

template <class T>
bool same(const ad::Tensor<T>& a, const ad::Tensor<T>& b) {
  return a.shape() == b.shape() && std::equal(a.data().begin(), a.data().end(), b.data().begin());
}

template <class T>
void expect_strictly_inside(const SceneParams<T>& p, const ParamRanges& r) {
  for (auto d : p.depth.data()) {
    CHECK(d > r.depth_min());
    CHECK(d < r.depth_max());
  }
  for (auto a : p.albedo.data()) {
    CHECK(a > 0);
    CHECK(a < 1);
  }
  for (std::int64_t i = 0; i < p.light.numel(); ++i) {
    const auto b = r.light_bounds(static_cast<int>(i % 4));
    CHECK(p.light.data()[i] > b[0]);
    CHECK(p.light.data()[i] < b[1]);
  }
  for (std::int64_t i = 0; i < p.camera.numel(); ++i) {
    const auto b = r.camera_bounds(static_cast<int>(i % 6));
    CHECK(p.camera.data()[i] > b[0]);
    CHECK(p.camera.data()[i] < b[1]);
  }
}

}  // namespace

TEST_CASE("default configuration yields four 256-wide blocks and 4/6-vector scene parameters") {
  Architecture arch;  // 64x64, F = 256
  InverseRenderer<float> model(arch, {}, 1);
  auto z = model.encode(random_images(1, 64, 2));
  for (const auto& b : z.blocks) CHECK(b.shape() == ad::Shape{1, 256});
  auto p = model.decode(z);
  CHECK(p.depth.shape() == ad::Shape{1, 64, 64});
  CHECK(p.albedo.shape() == ad::Shape{1, 64, 64, 3});
  CHECK(p.light.shape() == ad::Shape{1, 4});
  CHECK(p.camera.shape() == ad::Shape{1, 6});
  CHECK(extract_representation(z, parse_blocks("geom,alb")).shape() == ad::Shape{1, 512});
  CHECK(extract_representation(z, parse_blocks("geom,alb,cam,light")).shape() == ad::Shape{1, 1024});
  CHECK(extract_representation(z, parse_blocks("light")).shape() == ad::Shape{1, 256});
}

TEST_CASE("default parameter count is stable") {
  Architecture arch;
  InverseRenderer<float> a(arch, {}, 1), b(arch, {}, 99);
  std::int64_t total = 0;
  for (const auto& [name, t] : a.named_parameters()) total += t.numel();
  CHECK(a.parameter_count() == total);
  CHECK(a.parameter_count() == b.parameter_count());
  // Conv/linear weights plus biases, counted layer by layer.
  auto conv = [](std::int64_t in, std::int64_t out, std::int64_t k) { return in * out * k * k + out; };
  auto linear = [](std::int64_t in, std::int64_t out) { return in * out + out; };
  const std::int64_t encoder = conv(3, 32, 3) + conv(32, 64, 3) + conv(64, 128, 3) + conv(128, 256, 3) + linear(256, 256);
  auto map_decoder = [&](std::int64_t channels) {
    return linear(256, 256 * 4 * 4) + conv(256, 128, 4) + conv(128, 64, 4) + conv(64, 32, 4) + conv(32, channels, 4);
  };
  const std::int64_t vector_decoders = linear(256, 128) + linear(128, 6) + linear(256, 128) + linear(128, 4);
  CHECK(a.parameter_count() == 4 * encoder + map_decoder(1) + map_decoder(3) + vector_decoders);
  CHECK(a.parameter_count() == 5368014);
}

TEST_CASE("encoding is deterministic and initialisation is seeded") {
  const auto arch = tiny_arch();
  InverseRenderer<float> m1(arch, {}, 5), m2(arch, {}, 5), m3(arch, {}, 6);
  auto x = random_images(3, 16, 7);
  auto z1 = m1.encode(x), z2 = m2.encode(x), z3 = m3.encode(x);
  for (int b = 0; b < 4; ++b) CHECK(same(z1.blocks[b], z2.blocks[b]));
  CHECK_FALSE(same(z1.blocks[0], z3.blocks[0]));
}

TEST_CASE("a single-pixel change gives finite features") {
  InverseRenderer<float> model(tiny_arch(), {}, 3);
  auto x = random_images(1, 16, 8);
  auto y = x.clone();
  y.mutable_data()[0] = 1.0f - y.data()[0];
  for (const auto* img : {&x, &y}) {
    auto z = model.encode(*img);
    for (const auto& b : z.blocks)
      for (float v : b.data()) CHECK(std::isfinite(v));
  }
}

TEST_CASE("decoded parameters stay strictly inside their ranges, even for extreme features") {
  const auto arch = tiny_arch();
  ParamRanges ranges;
  InverseRenderer<float> model(arch, ranges, 4);
  auto p = model.decode(model.encode(random_images(2, 16, 9)));
  expect_strictly_inside(p, ranges);
  for (float mag : {1e3f, -1e3f, 1e6f}) {
    FeatureSet<float> z;
    for (auto& b : z.blocks) {
      std::vector<float> v(16);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = (i % 3 == 0 ? -mag : mag);
      b = TF::from({2, 8}, v);
    }
    expect_strictly_inside(model.decode(z), ranges);
  }
}

TEST_CASE("decode(encode(x)) renders") {
  const auto arch = tiny_arch();
  InverseRenderer<float> model(arch, {}, 10);
  render::Renderer r;
  r.intrinsics = render::CameraIntrinsics::from_fov(16, 30.0);
  auto img = r(model.decode(model.encode(random_images(2, 16, 11))));
  CHECK(img.shape() == ad::Shape{2, 16, 16, 3});
  for (float v : img.data()) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
}

TEST_CASE("blocks share no weights") {
  const auto arch = tiny_arch();
  InverseRenderer<float> model(arch, {}, 12);
  auto x = random_images(2, 16, 13);
  auto before = model.encode(x);
  for (auto& [name, t] : model.block_parameters(Block::geom))
    if (name.rfind("encoder.", 0) == 0) std::fill(t.mutable_data().begin(), t.mutable_data().end(), 0.0f);
  auto after = model.encode(x);
  CHECK_FALSE(same(before[Block::geom], after[Block::geom]));
  CHECK(same(before[Block::alb], after[Block::alb]));
  CHECK(same(before[Block::cam], after[Block::cam]));
  CHECK(same(before[Block::light], after[Block::light]));
}

TEST_CASE("block names parse and format") {
  CHECK(format_blocks(parse_blocks("geom,alb")) == "geom,alb");
  CHECK(parse_blocks("light,cam") == std::vector<Block>{Block::light, Block::cam});
  CHECK_THROWS(parse_blocks("geom,shape"));
  CHECK_THROWS(parse_blocks(""));
  CHECK_THROWS(parse_blocks("geom,geom"));
}

TEST_CASE("decoder depth adapts to the image size") {
  for (std::int64_t s : {8, 16, 32, 64}) {
    auto arch = tiny_arch(s);
    arch.decoder_widths = {8, 8, 4, 4};
    InverseRenderer<float> model(arch, {}, 1);
    auto p = model.decode(model.encode(random_images(1, s, 2)));
    CHECK(p.depth.shape() == ad::Shape{1, s, s});
  }
  auto odd = tiny_arch(15);
  CHECK_THROWS(odd.check());
}

TEST_CASE("parameter names are unique") {
  InverseRenderer<float> model(tiny_arch(), {}, 1);
  std::set<std::string> names;
  for (const auto& [name, t] : model.named_parameters()) CHECK(names.insert(name).second);
  CHECK(names.count("encoder.geom.conv0.weight") == 1);
}
