#include <doctest.h>

#include <cmath>

#include "pdr/ad/ops.hpp"
#include "pdr/loocc/loocc.hpp"
#include "pdr/loocc/trainer.hpp"
#include "pdr/scene/dataset.hpp"

using namespace pdr;
using namespace pdr::loocc;
using nets::Block;
using TF = ad::Tensor<float>;
using TD = ad::Tensor<double>;

namespace {

nets::Architecture tiny_arch(std::int64_t size = 16) {
  nets::Architecture a;
  a.image_size = size;
  a.feature_dim = 8;
  a.encoder_widths = {4, 8};
  a.decoder_widths = {8, 4};
  a.mlp_hidden = 8;
  return a;
}

render::Renderer renderer_for(std::int64_t size) {
  render::Renderer r;
  r.intrinsics = render::CameraIntrinsics::from_fov(size, 30.0);
  return r;
}

template <class T>
ad::Tensor<T> random_tensor(ad::Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<T> v(static_cast<std::size_t>(ad::numel(shape)));
  for (auto& x : v) x = static_cast<T>(rng.uniform(lo, hi));
  return ad::Tensor<T>::from(std::move(shape), std::move(v));
}

template <class T>
bool same(const ad::Tensor<T>& a, const ad::Tensor<T>& b) {
  return a.shape() == b.shape() && std::equal(a.data().begin(), a.data().end(), b.data().begin());
}

SceneParams<double> random_params(std::int64_t n, std::int64_t s, Rng& rng) {
  SceneParams<double> p;
  p.depth = random_tensor<double>({n, s, s}, rng, 0.95, 1.05);
  p.albedo = random_tensor<double>({n, s, s, 3}, rng, 0.0, 1.0);
  std::vector<double> l, c;
  for (std::int64_t i = 0; i < n; ++i) {
    l.insert(l.end(), {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(-40, 40), rng.uniform(-40, 40)});
    c.insert(c.end(), {rng.uniform(-20, 20), rng.uniform(-20, 20), 0.0, 0.0, 0.0, 0.0});
  }
  p.light = TD::from({n, 4}, l);
  p.camera = TD::from({n, 6}, c);
  return p;
}

nets::FeatureSet<double> random_features(std::int64_t n, std::int64_t f, Rng& rng) {
  nets::FeatureSet<double> z;
  for (auto& b : z.blocks) b = random_tensor<double>({n, f}, rng);
  return z;
}

PerturbRanges zero_deltas() {
  PerturbRanges p;
  p.light = {0, 0, 0, 0};
  p.camera_pitch = 0;
  p.camera_yaw = 0;
  return p;
}

// Plain-loop NT-Xent over normalised rows, used as an independent oracle.
double nt_xent_oracle(const std::vector<std::vector<double>>& u, const std::vector<std::vector<double>>& v, double tau) {
  std::vector<std::vector<double>> all(u);
  all.insert(all.end(), v.begin(), v.end());
  for (auto& r : all) {
    double n = 0;
    for (double x : r) n += x * x;
    for (double& x : r) x /= std::sqrt(n);
  }
  const std::size_t m = all.size(), half = u.size();
  double loss = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t pos = i < half ? i + half : i - half;
    double denom = 0, num = 0;
    for (std::size_t k = 0; k < m; ++k) {
      if (k == i) continue;
      double dot = 0;
      for (std::size_t d = 0; d < all[i].size(); ++d) dot += all[i][d] * all[k][d];
      denom += std::exp(dot / tau);
      if (k == pos) num = dot / tau;
    }
    loss += -(num - std::log(denom));
  }
  return loss / static_cast<double>(m);
}

std::vector<std::vector<double>> rows(const TD& t) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(t.dim(0)));
  for (std::int64_t i = 0; i < t.dim(0); ++i)
    out[static_cast<std::size_t>(i)].assign(t.data().begin() + i * t.dim(1), t.data().begin() + (i + 1) * t.dim(1));
  return out;
}

}  // namespace

TEST_CASE("default loss weights and temperature") {
  LooccConfig c;
  CHECK(c.temperature == 0.5);
  CHECK(c.alpha == 0.01);
  CHECK(c.beta == 1.0);
  CHECK(c.mode == Mode::none);
}

TEST_CASE("mode names round-trip") {
  for (auto m : {Mode::none, Mode::light, Mode::light_view}) CHECK(parse_mode(mode_name(m)) == m);
  CHECK(parse_mode("LV") == Mode::light_view);
  CHECK_THROWS(parse_mode("loocc-v"));
}

TEST_CASE("zero deltas leave parameters unchanged") {
  Rng rng(1);
  auto p = random_params(6, 4, rng);
  for (auto mode : {Mode::light, Mode::light_view}) {
    Rng r(2);
    auto a = perturb(p, mode, zero_deltas(), ParamRanges{}, r);
    CHECK(same(a.params.depth, p.depth));
    CHECK(same(a.params.albedo, p.albedo));
    CHECK(same(a.params.light, p.light));
    CHECK(same(a.params.camera, p.camera));
  }
}

TEST_CASE("light mode always perturbs light") {
  Rng rng(3);
  auto p = random_params(50, 2, rng);
  Rng r(4);
  auto a = perturb(p, Mode::light, PerturbRanges{}, ParamRanges{}, r);
  for (auto w : a.which) CHECK(w == Perturbed::light);
  CHECK(same(a.params.camera, p.camera));
}

TEST_CASE("light-view mode picks the camera about half the time") {
  Rng rng(5);
  auto p = random_params(10000, 1, rng);
  Rng r(6);
  auto a = perturb(p, Mode::light_view, PerturbRanges{}, ParamRanges{}, r);
  const auto cams = std::count(a.which.begin(), a.which.end(), Perturbed::camera);
  CHECK(cams >= 4800);
  CHECK(cams <= 5200);
}

TEST_CASE("perturbation touches only the chosen field of each sample") {
  Rng rng(7);
  const ParamRanges ranges;
  auto p = random_params(40, 3, rng);
  Rng r(8);
  auto a = perturb(p, Mode::light_view, PerturbRanges{}, ranges, r);
  CHECK(same(a.params.depth, p.depth));
  CHECK(same(a.params.albedo, p.albedo));
  for (std::int64_t i = 0; i < 40; ++i) {
    const bool cam = a.which[static_cast<std::size_t>(i)] == Perturbed::camera;
    for (int k = 0; k < 4; ++k) {
      const double before = p.light.data()[i * 4 + k], after = a.params.light.data()[i * 4 + k];
      if (cam) CHECK(before == after);
      const auto b = ranges.light_bounds(k);
      CHECK(after >= b[0]);
      CHECK(after <= b[1]);
    }
    for (int k = 0; k < 6; ++k) {
      const double before = p.camera.data()[i * 6 + k], after = a.params.camera.data()[i * 6 + k];
      if (!cam || k >= 2) CHECK(before == after);
      if (cam && k == 0) CHECK(std::abs(after - before) <= 22.5 + 1e-12);
      if (cam && k == 1) CHECK(std::abs(after - before) <= 45.0 + 1e-12);
    }
  }
}

TEST_CASE("perturb in mode none is an error") {
  Rng rng(9);
  auto p = random_params(2, 2, rng);
  CHECK_THROWS(perturb(p, Mode::none, PerturbRanges{}, ParamRanges{}, rng));
}

TEST_CASE("leave-one-out drops the perturbed block and normalises") {
  Rng rng(10);
  const std::int64_t n = 5, f = 3;
  auto z = random_features(n, f, rng);
  const std::vector<Perturbed> which{Perturbed::camera, Perturbed::light, Perturbed::light, Perturbed::camera,
                                     Perturbed::camera};
  auto u = leave_one_out(z, which);
  REQUIRE(u.shape() == ad::Shape{n, 3 * f});
  for (std::int64_t i = 0; i < n; ++i) {
    const Block third = which[static_cast<std::size_t>(i)] == Perturbed::camera ? Block::light : Block::cam;
    std::vector<double> expect;
    for (Block b : {Block::geom, Block::alb, third})
      for (std::int64_t d = 0; d < f; ++d) expect.push_back(z[b].data()[i * f + d]);
    double norm = 0;
    for (double x : expect) norm += x * x;
    norm = std::sqrt(norm);
    double len = 0;
    for (std::int64_t d = 0; d < 3 * f; ++d) {
      CHECK(u.data()[i * 3 * f + d] == doctest::Approx(expect[static_cast<std::size_t>(d)] / norm).epsilon(1e-12));
      len += u.data()[i * 3 * f + d] * u.data()[i * 3 * f + d];
    }
    CHECK(len == doctest::Approx(1.0).epsilon(1e-12));
  }
  // Uniform batches take the direct path.
  auto all_cam = leave_one_out(z, std::vector<Perturbed>(n, Perturbed::camera));
  auto all_light = leave_one_out(z, std::vector<Perturbed>(n, Perturbed::light));
  CHECK(all_cam.shape() == ad::Shape{n, 3 * f});
  CHECK(all_light.shape() == ad::Shape{n, 3 * f});
  CHECK(all_cam.data()[0] == doctest::Approx(u.data()[0]));
}

TEST_CASE("the perturbed block receives no gradient through leave-one-out") {
  Rng rng(11);
  auto z = random_features(4, 3, rng);
  for (auto& b : z.blocks) b.set_requires_grad(true);
  const std::vector<Perturbed> which{Perturbed::camera, Perturbed::camera, Perturbed::camera, Perturbed::camera};
  ad::sum(ad::square(leave_one_out(z, which))).backward();
  CHECK_FALSE(z[Block::cam].has_grad());
  CHECK(z[Block::light].has_grad());
}

TEST_CASE("NT-Xent hand value for orthogonal positive pairs") {
  auto u = TD::from({2, 2}, {1, 0, 0, 1});
  const double loss = nt_xent(u, u.clone(), 0.5).item();
  CHECK(loss == doctest::Approx(std::log(1.0 + 2.0 * std::exp(-2.0))).epsilon(1e-12));
  CHECK(loss == doctest::Approx(0.2395).epsilon(1e-3));
}

TEST_CASE("NT-Xent matches a loop oracle and is scale invariant") {
  Rng rng(12);
  auto u = random_tensor<double>({6, 5}, rng), v = random_tensor<double>({6, 5}, rng);
  const double loss = nt_xent(u, v, 0.5).item();
  CHECK(loss == doctest::Approx(nt_xent_oracle(rows(u), rows(v), 0.5)).epsilon(1e-12));
  CHECK(nt_xent(ad::scale(u, 3.0), ad::scale(v, 3.0), 0.5).item() == doctest::Approx(loss).epsilon(1e-12));
}

TEST_CASE("raising a negative's similarity never lowers NT-Xent") {
  // Anchor rows fixed; the second u-row rotates towards the first, which is a negative for it.
  double previous = -1e300;
  for (int step = 0; step <= 10; ++step) {
    const double t = step * M_PI / 20.0;  // 0 .. 90 degrees
    auto u = TD::from({2, 3}, {1, 0, 0, std::sin(t), std::cos(t), 0});
    auto v = TD::from({2, 3}, {1, 0, 0.05, std::sin(t), std::cos(t), 0.05});
    const double loss = nt_xent(u, v, 0.5).item();
    CHECK(loss >= previous - 1e-12);
    previous = loss;
  }
}

TEST_CASE("reconstruction loss") {
  Rng rng(13);
  auto x = random_tensor<double>({2, 4, 4, 3}, rng, 0, 1);
  CHECK(reconstruction_loss(x, x.clone()).item() == 0.0);
  CHECK(reconstruction_loss(TD::zeros({1, 4, 4, 3}), TD::full({1, 4, 4, 3}, 1.0)).item() == 1.0);
  auto y = random_tensor<double>({2, 4, 4, 3}, rng, 0, 1);
  double brute = 0;
  for (std::int64_t i = 0; i < x.numel(); ++i) brute += std::abs(x.data()[i] - y.data()[i]);
  CHECK(reconstruction_loss(x, y).item() == doctest::Approx(brute / static_cast<double>(x.numel())).epsilon(1e-14));
}

TEST_CASE("zero-delta cycle re-encodes the reconstruction") {
  const auto arch = tiny_arch();
  nets::InverseRenderer<float> model(arch, {}, 1);
  const auto r = renderer_for(16);
  LooccConfig cfg;
  cfg.mode = Mode::light_view;
  cfg.perturb = zero_deltas();
  Rng rng(14);
  auto x = random_tensor<float>({3, 16, 16, 3}, rng, 0, 1);
  auto c = cyclic_encode(x, model, r, cfg, rng);
  auto direct = model.encode(r(model.decode(model.encode(x))));
  for (int b = 0; b < 4; ++b) CHECK(same(c.augmented_features.blocks[b], direct.blocks[b]));
  for (float v : c.augmented_image.data()) {
    CHECK(v >= 0.0f);
    CHECK(v <= 1.0f);
  }
}

TEST_CASE("detach_aug cuts the renderer path from the augmented features") {
  const auto arch = tiny_arch();
  const auto r = renderer_for(16);
  Rng data(15);
  auto x = random_tensor<float>({2, 16, 16, 3}, data, 0, 1);
  auto decoder_grad = [&](bool detach) {
    nets::InverseRenderer<float> model(arch, {}, 2);
    LooccConfig cfg;
    cfg.mode = Mode::light_view;
    cfg.detach_aug = detach;
    Rng rng(16);
    auto c = cyclic_encode(x, model, r, cfg, rng);
    ad::sum(ad::square(c.augmented_features[Block::geom])).backward();
    double norm = 0;
    for (auto& [name, t] : model.named_parameters())
      if (name.rfind("decoder.", 0) == 0 && t.has_grad())
        for (float g : t.grad()) norm += std::abs(g);
    return norm;
  };
  CHECK(decoder_grad(true) == 0.0);
  CHECK(decoder_grad(false) > 0.0);
}

TEST_CASE("contrastive loss reaches the geometry encoder through the renderer") {
  const auto arch = tiny_arch();
  nets::InverseRenderer<float> model(arch, {}, 3);
  const auto r = renderer_for(16);
  LooccConfig cfg;
  cfg.mode = Mode::light_view;
  Rng rng(17);
  auto x = random_tensor<float>({4, 16, 16, 3}, rng, 0, 1);
  auto terms = total_loss(x, model, r, cfg, rng);
  terms.cont.backward();
  double norm = 0;
  for (auto& [name, t] : model.block_parameters(Block::geom))
    if (name.rfind("decoder.", 0) == 0 && t.has_grad())
      for (float g : t.grad()) norm += std::abs(g);
  CHECK(norm > 0.0);
}

TEST_CASE("total loss bookkeeping") {
  const auto arch = tiny_arch();
  nets::InverseRenderer<float> model(arch, {}, 4);
  const auto r = renderer_for(16);
  Rng data(18);
  auto x = random_tensor<float>({4, 16, 16, 3}, data, 0, 1);
  SUBCASE("mode none") {
    LooccConfig cfg;
    cfg.beta = 0.75;
    Rng rng(19);
    auto t = total_loss(x, model, r, cfg, rng);
    CHECK(t.total_value == static_cast<double>(0.75f * static_cast<float>(t.recon_value)));
    CHECK(t.cont_value == 0.0);
    CHECK_FALSE(t.cont.defined());
  }
  SUBCASE("contrastive modes") {
    for (auto mode : {Mode::light, Mode::light_view}) {
      LooccConfig cfg;
      cfg.mode = mode;
      Rng rng(20);
      auto t = total_loss(x, model, r, cfg, rng);
      const float expect = static_cast<float>(cfg.beta) * static_cast<float>(t.recon_value) +
                           static_cast<float>(cfg.alpha) * static_cast<float>(t.cont_value);
      CHECK(t.total_value == static_cast<double>(expect));
      CHECK(t.which.size() == 4);
    }
  }
}

TEST_CASE("early stopping fires on the (patience+1)-th non-improving epoch") {
  EarlyStopping es;
  es.patience = 3;
  const std::vector<double> losses{1.0, 0.8, 0.9, 0.85, 0.8, 0.81};
  std::vector<bool> stop;
  for (std::size_t e = 0; e < losses.size(); ++e) {
    es.update(static_cast<int>(e), losses[e]);
    stop.push_back(es.should_stop());
  }
  // Best 0.8 at epoch 1; epochs 2..5 do not improve (0.8 is not < 0.8).
  CHECK(stop == std::vector<bool>{false, false, false, false, false, true});
  CHECK(es.best_epoch == 1);
  CHECK(es.best == 0.8);
}

TEST_CASE("training is deterministic and the three modes share epoch 0") {
  scene::GeneratorConfig gen;
  gen.image_size = 16;
  auto ds = scene::build_dataset(40, {}, 3, gen);
  const auto arch = tiny_arch();
  const auto r = renderer_for(16);
  auto run = [&](Mode mode) {
    LooccConfig cfg;
    cfg.mode = mode;
    cfg.batch_size = 8;
    cfg.max_epochs = 2;
    Trainer t(ds, arch, cfg, r, 1, 2);
    std::vector<double> trace;
    t.fit([&](const EpochMetrics& m) { trace.push_back(m.val_recon); if (m.train_recon) trace.push_back(*m.train_recon); },
          [](bool) {});
    return trace;
  };
  const auto a = run(Mode::light_view), b = run(Mode::light_view);
  CHECK(a == b);
  CHECK(a.size() == 5);
  const auto none = run(Mode::none), light = run(Mode::light);
  CHECK(none[0] == a[0]);
  CHECK(light[0] == a[0]);
  CHECK(none != a);
}
