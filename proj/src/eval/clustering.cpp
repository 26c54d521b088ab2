// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pdr/eval/clustering.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace pdr::eval {

ClusteringResult hac_ward(const Matrix& x, int k) {
  const auto n = x.rows;
  if (n < 1) throw std::invalid_argument("hac_ward: no samples");
  if (k < 1 || k > n)
    throw std::invalid_argument("hac_ward: k=" + std::to_string(k) + " must be in [1, N=" + std::to_string(n) + "]");

  // Squared distances, full square storage.
  const auto un = static_cast<std::size_t>(n);
  std::vector<double> d(un * un, 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    const auto ri = x.row(i);
    for (std::int64_t j = i + 1; j < n; ++j) {
      const auto rj = x.row(j);
      double s = 0.0;
      for (std::int64_t c = 0; c < x.cols; ++c) {
        const double t = ri[static_cast<std::size_t>(c)] - rj[static_cast<std::size_t>(c)];
        s += t * t;
      }
      d[static_cast<std::size_t>(i) * un + static_cast<std::size_t>(j)] = s;
      d[static_cast<std::size_t>(j) * un + static_cast<std::size_t>(i)] = s;
    }
  }
  auto dist = [&](std::int64_t i, std::int64_t j) -> double& {
    return d[static_cast<std::size_t>(i) * un + static_cast<std::size_t>(j)];
  };

  // Slot s holds the cluster whose smallest member is s.
  std::vector<char> active(un, 1);
  std::vector<std::int64_t> size(un, 1), id(un), parent(un);
  std::iota(id.begin(), id.end(), 0);
  std::iota(parent.begin(), parent.end(), 0);

  ClusteringResult out;
  out.k = k;
  for (std::int64_t step = 0; step < n - k; ++step) {
    std::int64_t bi = -1, bj = -1;
    double best = std::numeric_limits<double>::infinity();
    for (std::int64_t i = 0; i < n; ++i) {
      if (!active[static_cast<std::size_t>(i)]) continue;
      for (std::int64_t j = i + 1; j < n; ++j) {
        if (!active[static_cast<std::size_t>(j)]) continue;
        if (dist(i, j) < best) {
          best = dist(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    const double ni = static_cast<double>(size[static_cast<std::size_t>(bi)]);
    const double nj = static_cast<double>(size[static_cast<std::size_t>(bj)]);
    for (std::int64_t m = 0; m < n; ++m) {
      if (!active[static_cast<std::size_t>(m)] || m == bi || m == bj) continue;
      const double nm = static_cast<double>(size[static_cast<std::size_t>(m)]);
      const double v = ((ni + nm) * dist(m, bi) + (nj + nm) * dist(m, bj) - nm * best) / (ni + nj + nm);
      dist(m, bi) = v;
      dist(bi, m) = v;
    }
    out.merges.push_back({id[static_cast<std::size_t>(bi)], id[static_cast<std::size_t>(bj)], std::sqrt(std::max(best, 0.0))});
    active[static_cast<std::size_t>(bj)] = 0;
    parent[static_cast<std::size_t>(bj)] = bi;
    size[static_cast<std::size_t>(bi)] += size[static_cast<std::size_t>(bj)];
    id[static_cast<std::size_t>(bi)] = n + step;
  }

  // Resolve each point to its surviving slot; slots are already ordered by
  // smallest member, so numbering active slots in order gives the final ids.
  std::vector<int> slot_label(un, -1);
  int next = 0;
  for (std::int64_t s = 0; s < n; ++s)
    if (active[static_cast<std::size_t>(s)]) slot_label[static_cast<std::size_t>(s)] = next++;
  out.assignments.resize(un);
  for (std::int64_t p = 0; p < n; ++p) {
    auto s = p;
    while (parent[static_cast<std::size_t>(s)] != s) s = parent[static_cast<std::size_t>(s)];
    out.assignments[static_cast<std::size_t>(p)] = slot_label[static_cast<std::size_t>(s)];
  }
  return out;
}

}  // namespace pdr::eval
