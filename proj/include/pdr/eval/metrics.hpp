// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

// Clustering quality against ground-truth labels. All functions reject empty
// or length-mismatched inputs and are invariant to renaming cluster ids.

#pragma once

#include <map>
#include <span>
#include <vector>

#include "pdr/io/json_util.hpp"

namespace pdr::eval {

/// (1/N) sum_c n_c p_c, with p_c the majority-label share of cluster c.
double cluster_accuracy(std::span<const int> assignments, std::span<const int> labels);

/// Support-weighted F1 where every point is predicted as its cluster's
/// majority label (ties to the smallest label).
double weighted_f1(std::span<const int> assignments, std::span<const int> labels);

/// I(A;L) / sqrt(H(A) H(L)) in nats; 1 when both entropies vanish, 0 when
/// only one does.
double nmi(std::span<const int> assignments, std::span<const int> labels);

struct ClassBreakdown {
  int label = 0;
  int support = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

struct MetricsReport {
  double cluster_accuracy = 0.0;
  double weighted_f1 = 0.0;
  double nmi = 0.0;
  int samples = 0;
  int classes = 0;
  int clusters = 0;
  std::vector<ClassBreakdown> per_class;
};

MetricsReport clustering_report(std::span<const int> assignments, std::span<const int> labels);
io::Json to_json(const MetricsReport& r);

}  // namespace pdr::eval
