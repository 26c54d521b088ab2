// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>

#include "pdr/eval/clustering.hpp"
#include "pdr/io/json_util.hpp"

namespace pdr::eval {

/// Block-to-block correlation summary. Entry (a,b) is the mean |Pearson r|
/// over all dimension pairs (a_i, b_j) whose variance is non-zero; empty
/// when one of the blocks is constant across samples.
struct PccReport {
  std::array<std::array<std::optional<double>, 4>, 4> matrix{};
  std::optional<double> mean_off_diagonal;  // over the defined distinct pairs
  std::int64_t samples = 0;
};

/// `blocks` holds one [N, F_b] matrix per feature block (geom, alb, cam, light).
PccReport pcc_disentanglement(const std::array<Matrix, 4>& blocks);

io::Json to_json(const PccReport& r);

}  // namespace pdr::eval
