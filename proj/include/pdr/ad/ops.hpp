// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pdr/ad/tensor.hpp"

namespace pdr::ad {

// Elementwise binary ops with numpy-style broadcasting.
template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b);

// Elementwise unary ops.
template <typename T> Tensor<T> neg(const Tensor<T>& x);
template <typename T> Tensor<T> scale(const Tensor<T>& x, T factor);
template <typename T> Tensor<T> add_scalar(const Tensor<T>& x, T offset);
template <typename T> Tensor<T> relu(const Tensor<T>& x);
template <typename T> Tensor<T> tanh(const Tensor<T>& x);
template <typename T> Tensor<T> sigmoid(const Tensor<T>& x);
template <typename T> Tensor<T> exp(const Tensor<T>& x);
template <typename T> Tensor<T> log(const Tensor<T>& x);
template <typename T> Tensor<T> abs(const Tensor<T>& x);
template <typename T> Tensor<T> sqrt(const Tensor<T>& x);
template <typename T> Tensor<T> square(const Tensor<T>& x);
template <typename T> Tensor<T> sin(const Tensor<T>& x);
template <typename T> Tensor<T> cos(const Tensor<T>& x);
/// Gradient is passed through strictly inside (lo, hi) and zero elsewhere.
template <typename T> Tensor<T> clamp(const Tensor<T>& x, T lo, T hi);

// Reductions.
template <typename T> Tensor<T> sum(const Tensor<T>& x);
template <typename T> Tensor<T> mean(const Tensor<T>& x);
template <typename T> Tensor<T> sum(const Tensor<T>& x, std::int64_t axis, bool keepdim = false);
template <typename T> Tensor<T> mean(const Tensor<T>& x, std::int64_t axis, bool keepdim = false);

// Shape manipulation. Negative axes count from the back.
template <typename T> Tensor<T> reshape(const Tensor<T>& x, Shape shape);
template <typename T> Tensor<T> permute(const Tensor<T>& x, const std::vector<std::int64_t>& dims);
template <typename T> Tensor<T> transpose(const Tensor<T>& x);  // 2-D
template <typename T> Tensor<T> slice(const Tensor<T>& x, std::int64_t axis, std::int64_t start, std::int64_t length);
template <typename T> Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::int64_t axis);

/// [m,k]x[k,n] or batched [b,m,k]x[b,k,n].
template <typename T> Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

/// x: [N,Cin,H,W], weight: [Cout,Cin,k,k], bias: [Cout] or undefined.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias,
                 std::int64_t stride, std::int64_t padding);

/// Adjoint of conv2d w.r.t. its input. x: [N,Cin,H,W], weight: [Cin,Cout,k,k].
/// Output spatial size is (H-1)*stride - 2*padding + k.
template <typename T>
Tensor<T> conv_transpose2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias,
                           std::int64_t stride, std::int64_t padding);

// Last-axis normalizations.
template <typename T> Tensor<T> softmax(const Tensor<T>& x);
template <typename T> Tensor<T> log_softmax(const Tensor<T>& x);
template <typename T> Tensor<T> l2_normalize(const Tensor<T>& x, T eps = T(1e-12));

/// Bilinear sampling of img [N,C,H,W] at grid [N,Ho,Wo,2] holding (x, y) in
/// [-1,1] with -1/1 at the centers of the corner pixels. Coordinates outside
/// the range are clamped to it (no gradient flows through a clamped
/// coordinate).
template <typename T> Tensor<T> grid_sample(const Tensor<T>& img, const Tensor<T>& grid);

/// src [B,M] or [B,M,C]; index holds B*M targets in [0, out_len) or -1 to
/// drop. Returns [B,out_len] or [B,out_len,C]; repeated targets accumulate.
template <typename T>
Tensor<T> scatter_add(const Tensor<T>& src, std::span<const std::int64_t> index, std::int64_t out_len);

/// src [B,L] or [B,L,C]; index holds B*M entries in [0,L) or -1 (yields 0).
template <typename T>
Tensor<T> gather(const Tensor<T>& src, std::span<const std::int64_t> index, std::int64_t m);

/// Central differences along `axis` with one-sided differences on the
/// first and last slice. Unit spacing.
template <typename T> Tensor<T> finite_difference(const Tensor<T>& x, std::int64_t axis);

template <typename T> Tensor<T> operator+(const Tensor<T>& a, const Tensor<T>& b) { return add(a, b); }
template <typename T> Tensor<T> operator-(const Tensor<T>& a, const Tensor<T>& b) { return sub(a, b); }
template <typename T> Tensor<T> operator*(const Tensor<T>& a, const Tensor<T>& b) { return mul(a, b); }
template <typename T> Tensor<T> operator/(const Tensor<T>& a, const Tensor<T>& b) { return div(a, b); }
template <typename T> Tensor<T> operator-(const Tensor<T>& x) { return neg(x); }
template <typename T> Tensor<T> operator*(const Tensor<T>& x, T s) { return scale(x, s); }
template <typename T> Tensor<T> operator*(T s, const Tensor<T>& x) { return scale(x, s); }
template <typename T> Tensor<T> operator+(const Tensor<T>& x, T s) { return add_scalar(x, s); }
template <typename T> Tensor<T> operator+(T s, const Tensor<T>& x) { return add_scalar(x, s); }
template <typename T> Tensor<T> operator-(const Tensor<T>& x, T s) { return add_scalar(x, -s); }
template <typename T> Tensor<T> operator-(T s, const Tensor<T>& x) { return add_scalar(neg(x), s); }

}  // namespace pdr::ad
