// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "pdr/ad/tensor.hpp"
#include "pdr/eval/clustering.hpp"

namespace pdr::eval {

/// Projection of the centred rows of `x` onto their leading principal axes.
/// Keeps min(components, N - 1, D) axes; each axis is signed so that its
/// largest-magnitude loading is positive.
Matrix pca_project(const Matrix& x, std::int64_t components);

/// Flattened images [N,H,W,3] as an N x (H W 3) matrix.
Matrix pixel_matrix(const ad::Tensor<float>& images);

}  // namespace pdr::eval
