// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "pdr/ad/tensor.hpp"
#include "pdr/io/json_util.hpp"

namespace pdr::eval {

/// Differentiable scalar score per row: [B,D] -> [B] or [B,1].
using Scorer = std::function<ad::Tensor<double>(const ad::Tensor<double>&)>;

struct AttributionReport {
  std::array<double, 4> percent{};      // per block, sums to 100
  std::array<std::int64_t, 4> block_dims{};
  std::vector<double> ig;               // one value per input dimension
  double score = 0.0;                   // f(x)
  double baseline_score = 0.0;          // f(baseline)
  double ig_sum = 0.0;
  double residual = 0.0;                // |sum IG - (f(x) - f(baseline))|
  int steps = 0;
};

/// Integrated gradients along the straight path from `baseline` (zeros when
/// empty) to `x`, midpoint rule with `steps` points. Block b owns the next
/// block_dims[b] entries of x; its share is sum |IG| over those entries
/// divided by the total. A zero total splits the shares evenly.
AttributionReport integrated_gradients(const Scorer& scorer, std::span<const double> x,
                                       std::span<const double> baseline, int steps,
                                       const std::array<std::int64_t, 4>& block_dims, std::int64_t chunk = 256);

io::Json to_json(const AttributionReport& r);

}  // namespace pdr::eval
