#include <doctest.h>

#include <cmath>
#include <thread>

#include "../support/fd_check.hpp"
#include "pdr/ad/ops.hpp"
#include "pdr/ad/optim.hpp"
#include "pdr/ad/parallel.hpp"
#include "pdr/rng.hpp"

using pdr::Rng;
using pdr::ad::Shape;
using pdr::ad::Tensor;
using pdr::testing::all_probes;
using pdr::testing::check_gradients;
namespace ad = pdr::ad;

namespace {

using TD = Tensor<double>;

TD random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(static_cast<std::size_t>(ad::numel(shape)));
  for (auto& x : v) x = rng.uniform(lo, hi);
  return TD::from(std::move(shape), std::move(v));
}

// Values with |x| in [0.2, 1] so piecewise ops stay away from their kinks.
TD away_from_zero(Shape shape, Rng& rng) {
  auto t = random_tensor(std::move(shape), rng, 0.2, 1.0);
  auto d = t.mutable_data();
  for (std::size_t i = 0; i < d.size(); ++i)
    if (rng.uniform() < 0.5) d[i] = -d[i];
  return t;
}

// Weighted sum against fixed random coefficients so every output element matters.
TD project(const TD& y, std::uint64_t seed) {
  Rng rng(seed);
  auto w = random_tensor(y.shape(), rng);
  return ad::sum(y * w);
}

void expect_unary(const std::function<TD(const TD&)>& f, TD x, double tol = 1e-5) {
  auto check = check_gradients({x}, [&] { return project(f(x), 99); }, all_probes({x}));
  CHECK(check.max_rel_error < tol);
}

void expect_binary(const std::function<TD(const TD&, const TD&)>& f, TD a, TD b, double tol = 1e-5) {
  std::vector<TD> leaves{a, b};
  auto check = check_gradients(leaves, [&] { return project(f(a, b), 7); }, all_probes(leaves));
  CHECK(check.max_rel_error < tol);
}

}  // namespace

TEST_CASE("matmul with the identity returns the other operand") {
  Rng rng(1);
  auto a = random_tensor({3, 3}, rng);
  auto eye = TD::from({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  auto out = ad::matmul(eye, a);
  for (std::int64_t i = 0; i < 9; ++i) CHECK(out.data()[i] == a.data()[i]);
}

TEST_CASE("conv2d with a centred delta kernel is the identity") {
  Rng rng(2);
  auto x = random_tensor({2, 3, 5, 6}, rng);
  std::vector<double> w(3 * 3 * 9, 0.0);
  for (int c = 0; c < 3; ++c) w[static_cast<std::size_t>((c * 3 + c) * 9 + 4)] = 1.0;
  auto out = ad::conv2d(x, TD::from({3, 3, 3, 3}, w), TD(), 1, 1);
  REQUIRE(out.shape() == x.shape());
  for (std::int64_t i = 0; i < x.numel(); ++i) CHECK(out.data()[i] == x.data()[i]);
}

TEST_CASE("bilinear sampling at pixel centres returns the pixel values") {
  Rng rng(3);
  const std::int64_t h = 4, w = 5;
  auto img = random_tensor({1, 2, h, w}, rng);
  std::vector<double> grid;
  for (std::int64_t y = 0; y < h; ++y)
    for (std::int64_t x = 0; x < w; ++x) {
      grid.push_back(2.0 * x / (w - 1) - 1.0);
      grid.push_back(2.0 * y / (h - 1) - 1.0);
    }
  auto out = ad::grid_sample(img, TD::from({1, h, w, 2}, grid));
  REQUIRE(out.shape() == img.shape());
  for (std::int64_t i = 0; i < img.numel(); ++i) CHECK(out.data()[i] == doctest::Approx(img.data()[i]).epsilon(1e-14));
}

TEST_CASE("square has derivative 2x") {
  auto x = TD::scalar(3.0).set_requires_grad(true);
  ad::square(x).backward();
  CHECK(x.grad()[0] == 6.0);
}

TEST_CASE("a constant has zero gradient") {
  auto x = TD::scalar(3.0).set_requires_grad(true);
  auto c = TD::scalar(5.0);
  auto y = ad::add(ad::scale(x, 0.0), c);
  y.backward();
  CHECK(x.grad()[0] == 0.0);
}

TEST_CASE("two-layer perceptron gradients match central differences") {
  Rng rng(4);
  // 2 inputs -> 2 hidden -> 1 output: 4 + 2 + 2 + 1 = 9 weights, plus 1 extra bias = 10 parameters.
  auto w1 = random_tensor({2, 2}, rng);
  auto b1 = random_tensor({1, 2}, rng);
  auto w2 = random_tensor({2, 1}, rng);
  auto b2 = random_tensor({1, 1}, rng);
  auto shift = random_tensor({1, 1}, rng);
  auto x = random_tensor({5, 2}, rng);
  std::vector<TD> leaves{w1, b1, w2, b2, shift};
  auto loss = [&] {
    auto hidden = ad::tanh(ad::matmul(x, w1) + b1);
    auto out = ad::matmul(hidden, w2) + b2;
    return ad::mean(ad::square(out - shift));
  };
  auto check = check_gradients(leaves, loss, all_probes(leaves));
  CHECK(check.checked == 10);
  CHECK(check.max_rel_error < 1e-5);
}

TEST_CASE("elementwise op gradients") {
  Rng rng(5);
  const Shape s{3, 4};
  SUBCASE("add") { expect_binary([](auto& a, auto& b) { return a + b; }, random_tensor(s, rng), random_tensor(s, rng)); }
  SUBCASE("sub broadcast") {
    expect_binary([](auto& a, auto& b) { return a - b; }, random_tensor(s, rng), random_tensor({1, 4}, rng));
  }
  SUBCASE("mul broadcast") {
    expect_binary([](auto& a, auto& b) { return a * b; }, random_tensor(s, rng), random_tensor({3, 1}, rng));
  }
  SUBCASE("div") {
    expect_binary([](auto& a, auto& b) { return a / b; }, random_tensor(s, rng), random_tensor(s, rng, 0.5, 2.0));
  }
  SUBCASE("neg") { expect_unary([](auto& x) { return -x; }, random_tensor(s, rng)); }
  SUBCASE("scale") { expect_unary([](auto& x) { return ad::scale(x, 2.5); }, random_tensor(s, rng)); }
  SUBCASE("add_scalar") { expect_unary([](auto& x) { return ad::add_scalar(x, 0.3); }, random_tensor(s, rng)); }
  SUBCASE("relu") { expect_unary([](auto& x) { return ad::relu(x); }, away_from_zero(s, rng)); }
  SUBCASE("tanh") { expect_unary([](auto& x) { return ad::tanh(x); }, random_tensor(s, rng)); }
  SUBCASE("sigmoid") { expect_unary([](auto& x) { return ad::sigmoid(x); }, random_tensor(s, rng)); }
  SUBCASE("exp") { expect_unary([](auto& x) { return ad::exp(x); }, random_tensor(s, rng)); }
  SUBCASE("log") { expect_unary([](auto& x) { return ad::log(x); }, random_tensor(s, rng, 0.5, 2.0)); }
  SUBCASE("abs") { expect_unary([](auto& x) { return ad::abs(x); }, away_from_zero(s, rng)); }
  SUBCASE("sqrt") { expect_unary([](auto& x) { return ad::sqrt(x); }, random_tensor(s, rng, 0.5, 2.0)); }
  SUBCASE("square") { expect_unary([](auto& x) { return ad::square(x); }, random_tensor(s, rng)); }
  SUBCASE("sin") { expect_unary([](auto& x) { return ad::sin(x); }, random_tensor(s, rng)); }
  SUBCASE("cos") { expect_unary([](auto& x) { return ad::cos(x); }, random_tensor(s, rng)); }
  SUBCASE("clamp") {
    // Inputs avoid the bounds +-0.5 by at least 0.05.
    auto x = random_tensor(s, rng, -1.0, 1.0);
    for (auto& v : x.mutable_data())
      if (std::abs(std::abs(v) - 0.5) < 0.05) v += 0.2;
    expect_unary([](auto& t) { return ad::clamp(t, -0.5, 0.5); }, x);
  }
}

TEST_CASE("reduction and shape op gradients") {
  Rng rng(6);
  SUBCASE("sum all") { expect_unary([](auto& x) { return ad::sum(x); }, random_tensor({2, 3}, rng)); }
  SUBCASE("mean all") { expect_unary([](auto& x) { return ad::mean(x); }, random_tensor({2, 3}, rng)); }
  SUBCASE("sum axis") { expect_unary([](auto& x) { return ad::sum(x, 1); }, random_tensor({2, 3, 4}, rng)); }
  SUBCASE("mean axis keepdim") {
    expect_unary([](auto& x) { return ad::mean(x, -1, true); }, random_tensor({2, 3, 4}, rng));
  }
  SUBCASE("reshape") { expect_unary([](auto& x) { return ad::reshape(x, {4, 6}); }, random_tensor({2, 3, 4}, rng)); }
  SUBCASE("permute") {
    expect_unary([](auto& x) { return ad::permute(x, {2, 0, 1}); }, random_tensor({2, 3, 4}, rng));
  }
  SUBCASE("transpose") { expect_unary([](auto& x) { return ad::transpose(x); }, random_tensor({3, 5}, rng)); }
  SUBCASE("slice") { expect_unary([](auto& x) { return ad::slice(x, 1, 1, 2); }, random_tensor({2, 4, 3}, rng)); }
  SUBCASE("concat") {
    expect_binary([](auto& a, auto& b) { return ad::concat<double>({a, b, a}, 1); }, random_tensor({2, 3}, rng),
                  random_tensor({2, 2}, rng));
  }
  SUBCASE("matmul") {
    expect_binary([](auto& a, auto& b) { return ad::matmul(a, b); }, random_tensor({3, 4}, rng),
                  random_tensor({4, 2}, rng));
  }
  SUBCASE("batched matmul") {
    expect_binary([](auto& a, auto& b) { return ad::matmul(a, b); }, random_tensor({2, 3, 4}, rng),
                  random_tensor({2, 4, 2}, rng));
  }
  SUBCASE("softmax") { expect_unary([](auto& x) { return ad::softmax(x); }, random_tensor({3, 5}, rng)); }
  SUBCASE("log_softmax") { expect_unary([](auto& x) { return ad::log_softmax(x); }, random_tensor({3, 5}, rng)); }
  SUBCASE("l2_normalize") { expect_unary([](auto& x) { return ad::l2_normalize(x); }, random_tensor({3, 5}, rng)); }
  SUBCASE("finite_difference") {
    expect_unary([](auto& x) { return ad::finite_difference(x, 1); }, random_tensor({2, 5, 4}, rng));
  }
}

TEST_CASE("convolution gradients") {
  Rng rng(7);
  auto x = random_tensor({2, 2, 6, 6}, rng);
  auto w = random_tensor({3, 2, 3, 3}, rng);
  auto b = random_tensor({3}, rng);
  std::vector<TD> leaves{x, w, b};
  SUBCASE("conv2d stride 2") {
    auto check = check_gradients(leaves, [&] { return project(ad::conv2d(x, w, b, 2, 1), 11); }, all_probes(leaves));
    CHECK(check.max_rel_error < 1e-5);
  }
  SUBCASE("conv_transpose2d stride 2") {
    auto wt = random_tensor({2, 3, 4, 4}, rng);
    std::vector<TD> tl{x, wt, b};
    auto check =
        check_gradients(tl, [&] { return project(ad::conv_transpose2d(x, wt, b, 2, 1), 12); }, all_probes(tl));
    CHECK(check.max_rel_error < 1e-5);
  }
}

TEST_CASE("conv_transpose2d is the adjoint of conv2d") {
  Rng rng(8);
  auto x = random_tensor({1, 2, 8, 8}, rng);
  auto w = random_tensor({3, 2, 4, 4}, rng);
  auto y = random_tensor({1, 3, 4, 4}, rng);
  // <conv(x), y> == <x, conv^T(y)>
  const double lhs = ad::sum(ad::conv2d(x, w, TD(), 2, 1) * y).item();
  const double rhs = ad::sum(x * ad::conv_transpose2d(y, w, TD(), 2, 1)).item();
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("sampling and scatter gradients") {
  Rng rng(9);
  SUBCASE("grid_sample w.r.t. image and grid") {
    auto img = random_tensor({1, 2, 5, 5}, rng);
    // Keep coordinates away from integer pixel positions, where bilinear is not differentiable.
    std::vector<double> g;
    for (int i = 0; i < 12; ++i) g.push_back(-0.8 + 0.13 * i + 0.01);
    auto grid = TD::from({1, 2, 3, 2}, g);
    std::vector<TD> leaves{img, grid};
    auto check = check_gradients(leaves, [&] { return project(ad::grid_sample(img, grid), 13); }, all_probes(leaves),
                                 1e-6);
    CHECK(check.max_rel_error < 1e-5);
  }
  SUBCASE("scatter_add and gather") {
    auto src = random_tensor({2, 4, 3}, rng);
    std::vector<std::int64_t> idx{0, 2, 2, -1, 1, 1, 0, 3};
    std::vector<TD> leaves{src};
    auto check = check_gradients(
        leaves,
        [&] {
          auto s = ad::scatter_add(src, idx, 4);
          return project(ad::gather(ad::square(s), idx, 4), 14);
        },
        all_probes(leaves));
    CHECK(check.max_rel_error < 1e-5);
  }
}

TEST_CASE("backward is linear in the loss") {
  Rng rng(10);
  auto x = random_tensor({4, 3}, rng).set_requires_grad(true);
  auto f = [&] { return ad::sum(ad::tanh(x) * x); };
  auto g = [&] { return ad::mean(ad::exp(x)); };
  const double a = 0.7, b = -1.3;
  f().backward();
  const auto gf = x.grad();
  x.zero_grad();
  g().backward();
  const auto gg = x.grad();
  x.zero_grad();
  (ad::scale(f(), a) + ad::scale(g(), b)).backward();
  const auto gc = x.grad();
  for (std::size_t i = 0; i < gc.size(); ++i) CHECK(gc[i] == doctest::Approx(a * gf[i] + b * gg[i]).epsilon(1e-12));
}

TEST_CASE("gradients are bit-identical across runs and thread counts") {
  auto run = [](int threads) {
    ad::set_num_threads(threads);
    Rng rng(11);
    auto x = random_tensor({2, 3, 8, 8}, rng).set_requires_grad(true);
    auto w = random_tensor({4, 3, 3, 3}, rng).set_requires_grad(true);
    auto y = ad::conv2d(x, w, TD(), 1, 1);
    ad::sum(ad::square(y)).backward();
    auto out = x.grad();
    auto gw = w.grad();
    out.insert(out.end(), gw.begin(), gw.end());
    return out;
  };
  const auto base = run(1);
  CHECK(run(1) == base);
  CHECK(run(3) == base);
  ad::set_num_threads(1);
}

TEST_CASE("a node shared by two paths accumulates both contributions once") {
  auto x = TD::scalar(2.0).set_requires_grad(true);
  auto y = x * x;  // used twice below
  auto z = y + y * x;
  z.backward();
  // z = x^2 + x^3 -> 2x + 3x^2 = 16
  CHECK(x.grad()[0] == doctest::Approx(16.0));
}

TEST_CASE("no-grad mode records no graph") {
  auto x = TD::scalar(2.0).set_requires_grad(true);
  {
    ad::NoGradGuard guard;
    auto y = ad::square(x);
    CHECK_FALSE(y.requires_grad());
  }
  CHECK(ad::square(x).requires_grad());
}

TEST_CASE("detach blocks gradient flow") {
  auto x = TD::scalar(3.0).set_requires_grad(true);
  auto y = ad::square(x).detach() * x;
  y.backward();
  CHECK(x.grad()[0] == 9.0);
}

TEST_CASE("shape mismatches throw") {
  CHECK_THROWS_AS(ad::add(TD::zeros({2, 3}), TD::zeros({3, 2})), std::invalid_argument);
  CHECK_THROWS_AS(ad::matmul(TD::zeros({2, 3}), TD::zeros({2, 3})), std::invalid_argument);
  CHECK_THROWS_AS(ad::reshape(TD::zeros({2, 3}), {4}), std::invalid_argument);
}

TEST_CASE("Adam moves a quadratic towards its minimum") {
  auto x = TD::from({2}, {3.0, -2.0}).set_requires_grad(true);
  ad::Adam<double> opt({x}, {.lr = 0.1});
  for (int i = 0; i < 300; ++i) {
    opt.zero_grad();
    ad::sum(ad::square(x)).backward();
    opt.step();
  }
  CHECK(std::abs(x.data()[0]) < 1e-2);
  CHECK(std::abs(x.data()[1]) < 1e-2);
  CHECK(opt.steps() == 300);
}

TEST_CASE("parallel_for propagates exceptions and handles nesting") {
  ad::set_num_threads(3);
  std::vector<int> hits(50, 0);
  ad::parallel_for(10, [&](std::int64_t i) {
    ad::parallel_for(5, [&](std::int64_t j) { hits[static_cast<std::size_t>(i * 5 + j)] += 1; });
  });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(ad::parallel_for(8,
                                   [](std::int64_t i) {
                                     if (i == 5) throw std::runtime_error("boom");
                                   }),
                  std::runtime_error);
  ad::set_num_threads(1);
}
