// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace pdr::eval {

/// Row-major N x D matrix of doubles.
struct Matrix {
  std::int64_t rows = 0, cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::int64_t r, std::int64_t c) : rows(r), cols(c), values(static_cast<std::size_t>(r * c), 0.0) {}
  double& operator()(std::int64_t i, std::int64_t j) { return values[static_cast<std::size_t>(i * cols + j)]; }
  double operator()(std::int64_t i, std::int64_t j) const { return values[static_cast<std::size_t>(i * cols + j)]; }
  std::span<const double> row(std::int64_t i) const {
    return {values.data() + i * cols, static_cast<std::size_t>(cols)};
  }
};

struct Merge {
  std::int64_t a = 0, b = 0;  // cluster ids: 0..N-1 singletons, N+t the cluster formed at step t
  double height = 0.0;        // ward distance sqrt(2 n_a n_b / (n_a + n_b)) * |c_a - c_b|
};

struct ClusteringResult {
  std::vector<int> assignments;  // ids 0..k-1, numbered by each cluster's smallest member
  int k = 0;
  std::vector<Merge> merges;
};

/// Ward-linkage agglomerative clustering down to k clusters, using the
/// Lance-Williams update on squared distances. Each step merges the pair
/// with the smallest distance; ties go to the lexicographically smallest
/// (i, j), where clusters are named by their smallest member index.
ClusteringResult hac_ward(const Matrix& x, int k);

}  // namespace pdr::eval
