// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pdr/eval/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pdr/ad/ops.hpp"

namespace pdr::eval {

using ad::Tensor;

namespace {

double score_of(const Scorer& scorer, std::span<const double> z) {
  ad::NoGradGuard no_grad;
  const auto d = static_cast<std::int64_t>(z.size());
  const auto out = scorer(Tensor<double>::from({1, d}, std::vector<double>(z.begin(), z.end())));
  if (out.numel() != 1) throw std::invalid_argument("integrated_gradients: scorer must return one value per row");
  return out.data()[0];
}

}  // namespace

AttributionReport integrated_gradients(const Scorer& scorer, std::span<const double> x,
                                       std::span<const double> baseline, int steps,
                                       const std::array<std::int64_t, 4>& block_dims, std::int64_t chunk) {
  if (steps < 1) throw std::invalid_argument("integrated_gradients: steps must be at least 1");
  if (chunk < 1) throw std::invalid_argument("integrated_gradients: chunk must be positive");
  const auto d = static_cast<std::int64_t>(x.size());
  std::int64_t total_dims = 0;
  for (auto b : block_dims) {
    if (b < 0) throw std::invalid_argument("integrated_gradients: negative block size");
    total_dims += b;
  }
  if (total_dims != d) throw std::invalid_argument("integrated_gradients: block sizes do not cover the input");
  std::vector<double> base(baseline.begin(), baseline.end());
  if (base.empty()) base.assign(x.size(), 0.0);
  if (base.size() != x.size()) throw std::invalid_argument("integrated_gradients: baseline length differs from input");

  std::vector<double> grad_sum(x.size(), 0.0);
  for (std::int64_t start = 0; start < steps; start += chunk) {
    const auto rows = std::min<std::int64_t>(chunk, steps - start);
    std::vector<double> pts(static_cast<std::size_t>(rows * d));
    for (std::int64_t r = 0; r < rows; ++r) {
      const double alpha = (static_cast<double>(start + r) + 0.5) / static_cast<double>(steps);
      for (std::int64_t i = 0; i < d; ++i)
        pts[static_cast<std::size_t>(r * d + i)] =
            base[static_cast<std::size_t>(i)] + alpha * (x[static_cast<std::size_t>(i)] - base[static_cast<std::size_t>(i)]);
    }
    auto z = Tensor<double>::from({rows, d}, std::move(pts));
    z.set_requires_grad(true);
    auto scores = scorer(z);
    if (scores.numel() != rows) throw std::invalid_argument("integrated_gradients: scorer must return one value per row");
    ad::sum(scores).backward();
    const auto g = z.grad();
    for (std::int64_t r = 0; r < rows; ++r)
      for (std::int64_t i = 0; i < d; ++i) grad_sum[static_cast<std::size_t>(i)] += g[static_cast<std::size_t>(r * d + i)];
  }

  AttributionReport rep;
  rep.steps = steps;
  rep.block_dims = block_dims;
  rep.ig.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    rep.ig[i] = (x[i] - base[i]) * grad_sum[i] / static_cast<double>(steps);
    rep.ig_sum += rep.ig[i];
  }
  rep.score = score_of(scorer, x);
  rep.baseline_score = score_of(scorer, base);
  rep.residual = std::abs(rep.ig_sum - (rep.score - rep.baseline_score));

  std::array<double, 4> mass{};
  std::size_t offset = 0;
  double total = 0.0;
  for (std::size_t b = 0; b < 4; ++b) {
    for (std::int64_t k = 0; k < block_dims[b]; ++k) mass[b] += std::abs(rep.ig[offset++]);
    total += mass[b];
  }
  for (std::size_t b = 0; b < 4; ++b) rep.percent[b] = total > 0.0 ? 100.0 * mass[b] / total : 25.0;
  return rep;
}

io::Json to_json(const AttributionReport& r) {
  io::Json pct = io::Json::object();
  const char* names[4] = {"geom", "alb", "cam", "light"};
  for (std::size_t b = 0; b < 4; ++b) pct[names[b]] = r.percent[b];
  return {{"task", "attribute"},
          {"percent", pct},
          {"score", r.score},
          {"baseline_score", r.baseline_score},
          {"ig_sum", r.ig_sum},
          {"completeness_residual", r.residual},
          {"steps", r.steps},
          {"ig", r.ig}};
}

}  // namespace pdr::eval
