// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

// Central-difference gradient oracle shared by unit and acceptance tests.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "pdr/ad/tensor.hpp"

namespace pdr::testing {

struct Probe {
  std::size_t leaf = 0;
  std::int64_t index = 0;
};

struct GradCheck {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  std::size_t checked = 0;
  std::vector<double> analytic, numeric;
};

/// Relative error with an absolute floor so near-zero gradients do not blow up.
inline double rel_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// `loss` must rebuild the graph from the current leaf values on every call.
inline GradCheck check_gradients(std::vector<ad::Tensor<double>> leaves,
                                 const std::function<ad::Tensor<double>()>& loss, const std::vector<Probe>& probes,
                                 double eps = 1e-4, double floor = 1e-6) {
  for (auto& l : leaves) {
    l.set_requires_grad(true);
    l.zero_grad();
  }
  loss().backward();
  GradCheck out;
  for (const auto& p : probes) {
    auto& leaf = leaves[p.leaf];
    const double analytic = leaf.has_grad() ? leaf.grad()[static_cast<std::size_t>(p.index)] : 0.0;
    auto data = leaf.mutable_data();
    const double saved = data[p.index];
    data[p.index] = saved + eps;
    const double up = loss().item();
    data[p.index] = saved - eps;
    const double down = loss().item();
    data[p.index] = saved;
    const double numeric = (up - down) / (2.0 * eps);
    out.analytic.push_back(analytic);
    out.numeric.push_back(numeric);
    out.max_rel_error = std::max(out.max_rel_error, rel_error(analytic, numeric, floor));
    out.max_abs_error = std::max(out.max_abs_error, std::abs(analytic - numeric));
    ++out.checked;
  }
  return out;
}

/// Every element of every leaf.
inline std::vector<Probe> all_probes(const std::vector<ad::Tensor<double>>& leaves) {
  std::vector<Probe> probes;
  for (std::size_t l = 0; l < leaves.size(); ++l)
    for (std::int64_t i = 0; i < leaves[l].numel(); ++i) probes.push_back({l, i});
  return probes;
}

}  // namespace pdr::testing
