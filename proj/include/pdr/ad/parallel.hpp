// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>

namespace pdr::ad {

/// Worker cap for data-parallel loops inside ops. Defaults to 1, or to
/// PDR_THREADS when that variable is set. Results never depend on it: every
/// parallel loop writes disjoint outputs and reductions run in index order.
void set_num_threads(int threads);
int num_threads();

/// Runs body(i) for i in [0, n), split into contiguous chunks.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& body);

}  // namespace pdr::ad
