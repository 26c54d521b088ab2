#include <doctest.h>

#include <cmath>

#include "../support/fd_check.hpp"
#include "pdr/ad/ops.hpp"
#include "pdr/render/renderer.hpp"
#include "pdr/rng.hpp"

using namespace pdr;
using namespace pdr::render;
using TD = ad::Tensor<double>;

namespace {

TD constant(ad::Shape s, double v) { return TD::full(std::move(s), v); }

TD random_tensor(ad::Shape shape, Rng& rng, double lo, double hi) {
  std::vector<double> v(static_cast<std::size_t>(ad::numel(shape)));
  for (auto& x : v) x = rng.uniform(lo, hi);
  return TD::from(std::move(shape), std::move(v));
}

SceneParams<double> flat_scene(std::int64_t size, Rng& rng, double depth = 1.0) {
  SceneParams<double> p;
  p.depth = constant({1, size, size}, depth);
  p.albedo = random_tensor({1, size, size, 3}, rng, 0.1, 0.9);
  p.light = TD::from({1, 4}, {1.0, 0.0, 0.0, 0.0});
  p.camera = TD::zeros({1, 6});
  return p;
}

Renderer make_renderer(std::int64_t size) {
  Renderer r;
  r.intrinsics = CameraIntrinsics::from_fov(size, 30.0);
  return r;
}

}  // namespace

TEST_CASE("constant depth gives frontal normals") {
  auto n = normals_from_depth(constant({1, 5, 5}, 1.0));
  for (std::int64_t i = 0; i < 25; ++i) {
    CHECK(n.data()[i * 3 + 0] == 0.0);
    CHECK(n.data()[i * 3 + 1] == 0.0);
    CHECK(n.data()[i * 3 + 2] == 1.0);
  }
}

TEST_CASE("a plane sloping along u has a 45 degree normal") {
  std::vector<double> d;
  for (int v = 0; v < 4; ++v)
    for (int u = 0; u < 5; ++u) d.push_back(1.0 + u);
  auto n = normals_from_depth(TD::from({1, 4, 5}, d));
  const double r = 1.0 / std::sqrt(2.0);
  for (std::int64_t i = 0; i < 20; ++i) {
    CHECK(n.data()[i * 3 + 0] == doctest::Approx(-r).epsilon(1e-12));
    CHECK(n.data()[i * 3 + 1] == doctest::Approx(0.0));
    CHECK(n.data()[i * 3 + 2] == doctest::Approx(r).epsilon(1e-12));
  }
}

TEST_CASE("normals of random depth maps have unit length") {
  Rng rng(1);
  auto n = normals_from_depth(random_tensor({2, 7, 6}, rng, 0.9, 1.1), 20.0);
  for (std::int64_t i = 0; i < 2 * 7 * 6; ++i) {
    const double len = std::hypot(n.data()[i * 3], n.data()[i * 3 + 1], n.data()[i * 3 + 2]);
    CHECK(std::abs(len - 1.0) < 1e-6);
  }
}

TEST_CASE("light direction from spherical angles") {
  auto close = [](std::array<double, 3> a, std::array<double, 3> b) {
    for (int i = 0; i < 3; ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12).scale(1.0));
  };
  close(light_direction(0.0, 0.0), {0, 0, 1});
  close(light_direction(90.0, 0.0), {0, 1, 0});
  close(light_direction(90.0, 37.0), {0, 1, 0});
  close(light_direction(0.0, 90.0), {1, 0, 0});
  auto t = light_direction(TD::from({2, 4}, {0, 0, 0, 90, 0, 0, 90, 10}));
  CHECK(t.data()[0] == doctest::Approx(1.0));
  CHECK(t.data()[4] == doctest::Approx(1.0));
}

TEST_CASE("shading special cases") {
  Rng rng(2);
  auto albedo = random_tensor({1, 4, 4, 3}, rng, 0.0, 1.0);
  auto flat = normals_from_depth(constant({1, 4, 4}, 1.0));
  SUBCASE("pure ambient passes albedo through") {
    auto img = shade(albedo, flat, TD::from({1, 4}, {1.0, 0.0, 30.0, 20.0}));
    for (std::int64_t i = 0; i < albedo.numel(); ++i) CHECK(img.data()[i] == albedo.data()[i]);
  }
  SUBCASE("zero albedo is black") {
    auto img = shade(TD::zeros({1, 4, 4, 3}), flat, TD::from({1, 4}, {0.5, 0.5, 0.0, 0.0}));
    for (double v : img.data()) CHECK(v == 0.0);
  }
  SUBCASE("aligned light on a flat surface") {
    auto img = shade(albedo, flat, TD::from({1, 4}, {0.0, 1.0, 0.0, 0.0}));
    for (std::int64_t i = 0; i < albedo.numel(); ++i) CHECK(img.data()[i] == doctest::Approx(albedo.data()[i]));
  }
}

TEST_CASE("identity camera reproduces the canonical image in the interior") {
  Rng rng(3);
  const std::int64_t s = 16;
  auto p = flat_scene(s, rng);
  auto r = make_renderer(s);
  auto img = r(p);
  double worst = 0.0;
  for (std::int64_t v = 1; v < s - 1; ++v)
    for (std::int64_t u = 1; u < s - 1; ++u)
      for (int c = 0; c < 3; ++c) {
        const auto i = (v * s + u) * 3 + c;
        worst = std::max(worst, std::abs(img.data()[i] - p.albedo.data()[i]));
      }
  CHECK(worst < 1e-3);
}

TEST_CASE("translation shifts the image by focal * tx / standoff pixels") {
  Rng rng(4);
  const std::int64_t s = 32;
  auto p = flat_scene(s, rng);
  auto r = make_renderer(s);
  const int shift = 3;
  const double tx = shift * r.config.standoff / r.intrinsics.focal;
  auto base = r(p);
  p.camera = TD::from({1, 6}, {0, 0, 0, tx, 0, 0});
  auto moved = r(p);
  // Cross-correlation of mean-removed grey images over horizontal shifts.
  auto grey = [&](const TD& img) {
    std::vector<double> g(static_cast<std::size_t>(s * s));
    for (std::int64_t i = 0; i < s * s; ++i) g[i] = img.data()[i * 3] + img.data()[i * 3 + 1] + img.data()[i * 3 + 2];
    double m = 0;
    for (double x : g) m += x;
    for (double& x : g) x -= m / static_cast<double>(g.size());
    return g;
  };
  auto a = grey(base), b = grey(moved);
  int best = 0;
  double best_score = -1e300;
  for (int k = -8; k <= 8; ++k) {
    double score = 0;
    for (std::int64_t v = 0; v < s; ++v)
      for (std::int64_t u = 8; u < s - 8; ++u) score += a[v * s + u] * b[v * s + u + k];
    if (score > best_score) {
      best_score = score;
      best = k;
    }
  }
  CHECK(best == shift);
}

TEST_CASE("render gradients match central differences at 8x8") {
  Rng rng(5);
  const std::int64_t s = 8;
  auto r = make_renderer(s);
  SceneParams<double> p;
  p.depth = random_tensor({1, s, s}, rng, 0.97, 1.03);
  p.albedo = random_tensor({1, s, s, 3}, rng, 0.2, 0.8);
  p.light = TD::from({1, 4}, {0.3, 0.4, 10.0, -15.0});
  p.camera = TD::from({1, 6}, {4.0, -6.0, 3.0, 0.013, -0.021, 0.017});
  std::vector<TD> leaves{p.depth, p.albedo, p.light, p.camera};
  auto loss = [&] { return ad::mean(r(p)); };
  auto check = testing::check_gradients(leaves, loss, testing::all_probes(leaves), 1e-6, 1e-7);
  CHECK(check.max_rel_error < 1e-3);
}

TEST_CASE("render output is deterministic and bounded") {
  Rng rng(6);
  const std::int64_t s = 12;
  auto r = make_renderer(s);
  SceneParams<double> p;
  p.depth = random_tensor({2, s, s}, rng, 0.9, 1.1);
  p.albedo = random_tensor({2, s, s, 3}, rng, 0.0, 1.0);
  p.light = TD::from({2, 4}, {0.2, 0.9, 20.0, 40.0, 0.0, 1.0, -60.0, 10.0});
  p.camera = TD::from({2, 6}, {20.0, -40.0, 10.0, 0.1, -0.1, 0.2, -30.0, 50.0, 0.0, 0.0, 0.2, -0.2});
  auto a = r(p), b = r(p);
  CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
  for (double v : a.data()) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("every output pixel is a convex blend of shaded colours and background") {
  Rng rng(7);
  const std::int64_t s = 12;
  auto r = make_renderer(s);
  SceneParams<double> p;
  p.depth = random_tensor({1, s, s}, rng, 0.9, 1.1);
  p.albedo = random_tensor({1, s, s, 3}, rng, 0.3, 0.7);
  p.light = TD::from({1, 4}, {0.5, 0.5, 10.0, 10.0});
  p.camera = TD::from({1, 6}, {10.0, 25.0, 5.0, 0.05, 0.0, 0.1});
  auto canonical = shade(p.albedo, normals_from_depth(p.depth, r.intrinsics.focal / r.config.standoff), p.light);
  auto img = r(p);
  for (int c = 0; c < 3; ++c) {
    double lo = r.config.background, hi = r.config.background;
    for (std::int64_t i = 0; i < s * s; ++i) {
      lo = std::min(lo, canonical.data()[i * 3 + c]);
      hi = std::max(hi, canonical.data()[i * 3 + c]);
    }
    for (std::int64_t i = 0; i < s * s; ++i) {
      CHECK(img.data()[i * 3 + c] >= lo - 1e-12);
      CHECK(img.data()[i * 3 + c] <= hi + 1e-12);
    }
  }
}

TEST_CASE("small yaw rotations move a raised spot monotonically along u") {
  const std::int64_t s = 32;
  auto r = make_renderer(s);
  SceneParams<double> p;
  p.depth = constant({1, s, s}, 1.08);
  std::vector<double> alb(static_cast<std::size_t>(s * s * 3), 0.0);
  for (std::int64_t v = 14; v < 18; ++v)
    for (std::int64_t u = 14; u < 18; ++u)
      for (int c = 0; c < 3; ++c) alb[static_cast<std::size_t>((v * s + u) * 3 + c)] = 1.0;
  p.albedo = TD::from({1, s, s, 3}, alb);
  p.light = TD::from({1, 4}, {1.0, 0.0, 0.0, 0.0});
  std::vector<double> centroids;
  for (double yaw : {-8.0, -4.0, 0.0, 4.0, 8.0}) {
    p.camera = TD::from({1, 6}, {0.0, yaw, 0.0, 0.0, 0.0, 0.0});
    auto img = r(p);
    double wsum = 0, usum = 0;
    for (std::int64_t v = 0; v < s; ++v)
      for (std::int64_t u = 0; u < s; ++u) {
        const double w = std::max(0.0, img.data()[(v * s + u) * 3] - 0.6);
        wsum += w;
        usum += w * static_cast<double>(u);
      }
    REQUIRE(wsum > 0.0);
    centroids.push_back(usum / wsum);
  }
  const bool increasing = centroids[1] > centroids[0];
  for (std::size_t i = 1; i < centroids.size(); ++i) CHECK((centroids[i] > centroids[i - 1]) == increasing);
}

TEST_CASE("render rejects malformed inputs") {
  Rng rng(8);
  auto r = make_renderer(8);
  auto p = flat_scene(8, rng);
  p.light = TD::zeros({1, 3});
  CHECK_THROWS_AS(r(p), std::invalid_argument);
  auto q = flat_scene(6, rng);
  CHECK_THROWS_AS(r(q), std::invalid_argument);
}
