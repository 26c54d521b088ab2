// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pdr/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pdr::eval {

namespace {

struct Contingency {
  std::vector<int> clusters, labels;          // sorted distinct ids
  std::vector<std::vector<long>> counts;      // [cluster][label]
  std::vector<long> cluster_size, label_size;
  long n = 0;
};

std::vector<int> distinct(std::span<const int> v) {
  std::vector<int> out(v.begin(), v.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t position(const std::vector<int>& sorted, int v) {
  return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
}

Contingency tabulate(std::span<const int> assignments, std::span<const int> labels) {
  if (assignments.empty()) throw std::invalid_argument("clustering metrics need at least one sample");
  if (assignments.size() != labels.size())
    throw std::invalid_argument("assignments and labels differ in length");
  Contingency t;
  t.clusters = distinct(assignments);
  t.labels = distinct(labels);
  t.counts.assign(t.clusters.size(), std::vector<long>(t.labels.size(), 0));
  t.cluster_size.assign(t.clusters.size(), 0);
  t.label_size.assign(t.labels.size(), 0);
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    const auto c = position(t.clusters, assignments[i]);
    const auto l = position(t.labels, labels[i]);
    ++t.counts[c][l];
    ++t.cluster_size[c];
    ++t.label_size[l];
  }
  t.n = static_cast<long>(assignments.size());
  return t;
}

// Index (into t.labels) of each cluster's majority label; first maximum wins.
std::vector<std::size_t> majority(const Contingency& t) {
  std::vector<std::size_t> out(t.clusters.size(), 0);
  for (std::size_t c = 0; c < t.clusters.size(); ++c) {
    const auto& row = t.counts[c];
    out[c] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

std::vector<ClassBreakdown> per_class(const Contingency& t) {
  const auto major = majority(t);
  std::vector<long> tp(t.labels.size(), 0), predicted(t.labels.size(), 0);
  for (std::size_t c = 0; c < t.clusters.size(); ++c) {
    predicted[major[c]] += t.cluster_size[c];
    tp[major[c]] += t.counts[c][major[c]];
  }
  std::vector<ClassBreakdown> out;
  for (std::size_t l = 0; l < t.labels.size(); ++l) {
    ClassBreakdown b;
    b.label = t.labels[l];
    b.support = static_cast<int>(t.label_size[l]);
    b.precision = predicted[l] > 0 ? static_cast<double>(tp[l]) / static_cast<double>(predicted[l]) : 0.0;
    b.recall = t.label_size[l] > 0 ? static_cast<double>(tp[l]) / static_cast<double>(t.label_size[l]) : 0.0;
    b.f1 = (b.precision + b.recall) > 0.0 ? 2.0 * b.precision * b.recall / (b.precision + b.recall) : 0.0;
    out.push_back(b);
  }
  return out;
}

double entropy(const std::vector<long>& sizes, long n) {
  double h = 0.0;
  for (long s : sizes) {
    if (s == 0) continue;
    const double p = static_cast<double>(s) / static_cast<double>(n);
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace

double cluster_accuracy(std::span<const int> assignments, std::span<const int> labels) {
  const auto t = tabulate(assignments, labels);
  long correct = 0;
  for (const auto& row : t.counts) correct += *std::max_element(row.begin(), row.end());
  return static_cast<double>(correct) / static_cast<double>(t.n);
}

double weighted_f1(std::span<const int> assignments, std::span<const int> labels) {
  const auto t = tabulate(assignments, labels);
  double total = 0.0;
  for (const auto& b : per_class(t)) total += static_cast<double>(b.support) * b.f1;
  return total / static_cast<double>(t.n);
}

double nmi(std::span<const int> assignments, std::span<const int> labels) {
  const auto t = tabulate(assignments, labels);
  const double ha = entropy(t.cluster_size, t.n), hl = entropy(t.label_size, t.n);
  if (ha == 0.0 && hl == 0.0) return 1.0;
  if (ha == 0.0 || hl == 0.0) return 0.0;
  const double n = static_cast<double>(t.n);
  double mi = 0.0;
  for (std::size_t c = 0; c < t.clusters.size(); ++c) {
    for (std::size_t l = 0; l < t.labels.size(); ++l) {
      const long nij = t.counts[c][l];
      if (nij == 0) continue;
      const double pij = static_cast<double>(nij) / n;
      mi += pij * std::log(static_cast<double>(nij) * n /
                           (static_cast<double>(t.cluster_size[c]) * static_cast<double>(t.label_size[l])));
    }
  }
  return std::clamp(mi / std::sqrt(ha * hl), 0.0, 1.0);
}

MetricsReport clustering_report(std::span<const int> assignments, std::span<const int> labels) {
  const auto t = tabulate(assignments, labels);
  MetricsReport r;
  r.cluster_accuracy = cluster_accuracy(assignments, labels);
  r.weighted_f1 = weighted_f1(assignments, labels);
  r.nmi = nmi(assignments, labels);
  r.samples = static_cast<int>(t.n);
  r.classes = static_cast<int>(t.labels.size());
  r.clusters = static_cast<int>(t.clusters.size());
  r.per_class = per_class(t);
  return r;
}

io::Json to_json(const MetricsReport& r) {
  io::Json classes = io::Json::array();
  for (const auto& b : r.per_class)
    classes.push_back(
        {{"label", b.label}, {"support", b.support}, {"precision", b.precision}, {"recall", b.recall}, {"f1", b.f1}});
  return {{"cluster_accuracy", r.cluster_accuracy},
          {"weighted_f1", r.weighted_f1},
          {"nmi", r.nmi},
          {"samples", r.samples},
          {"classes", r.classes},
          {"clusters", r.clusters},
          {"per_class", classes}};
}

}  // namespace pdr::eval
