// Reference implementations used by tests: slow, direct, independent of the
// library code they check.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "pdr/eval/clustering.hpp"

namespace pdr::testing {

// Recompute-from-scratch ward clustering. Clusters are keyed by their smallest
// member; every step scans all pairs in lexicographic order of those keys.
inline std::vector<int> naive_ward(const eval::Matrix& x, int k) {
  std::vector<std::vector<std::int64_t>> clusters;
  for (std::int64_t i = 0; i < x.rows; ++i) clusters.push_back({i});
  auto centroid = [&](const std::vector<std::int64_t>& c) {
    std::vector<double> m(static_cast<std::size_t>(x.cols), 0.0);
    for (auto i : c)
      for (std::int64_t d = 0; d < x.cols; ++d) m[static_cast<std::size_t>(d)] += x(i, d);
    for (auto& v : m) v /= static_cast<double>(c.size());
    return m;
  };
  while (static_cast<int>(clusters.size()) > k) {
    std::sort(clusters.begin(), clusters.end());
    double best = std::numeric_limits<double>::infinity();
    std::size_t ba = 0, bb = 0;
    for (std::size_t a = 0; a < clusters.size(); ++a)
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        const auto ca = centroid(clusters[a]), cb = centroid(clusters[b]);
        double d2 = 0;
        for (std::size_t d = 0; d < ca.size(); ++d) d2 += (ca[d] - cb[d]) * (ca[d] - cb[d]);
        const double na = static_cast<double>(clusters[a].size()), nb = static_cast<double>(clusters[b].size());
        const double cost = na * nb / (na + nb) * d2;  // increase in within-cluster sum of squares
        if (cost < best) {
          best = cost;
          ba = a;
          bb = b;
        }
      }
    clusters[ba].insert(clusters[ba].end(), clusters[bb].begin(), clusters[bb].end());
    std::sort(clusters[ba].begin(), clusters[ba].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bb));
  }
  std::sort(clusters.begin(), clusters.end());
  std::vector<int> out(static_cast<std::size_t>(x.rows));
  for (std::size_t c = 0; c < clusters.size(); ++c)
    for (auto i : clusters[c]) out[static_cast<std::size_t>(i)] = static_cast<int>(c);
  return out;
}

// Normalized mutual information, sqrt(Ha * Hl) normalization, natural log.
inline double nmi_oracle(const std::vector<int>& a, const std::vector<int>& l) {
  const double n = static_cast<double>(a.size());
  std::map<int, double> pa, pl;
  std::map<std::pair<int, int>, double> pj;
  for (std::size_t i = 0; i < a.size(); ++i) {
    pa[a[i]] += 1 / n;
    pl[l[i]] += 1 / n;
    pj[{a[i], l[i]}] += 1 / n;
  }
  double ha = 0, hl = 0, mi = 0;
  for (auto [k, p] : pa) ha -= p * std::log(p);
  for (auto [k, p] : pl) hl -= p * std::log(p);
  for (auto [k, p] : pj) mi += p * std::log(p / (pa[k.first] * pl[k.second]));
  return mi / std::sqrt(ha * hl);
}

}  // namespace pdr::testing
