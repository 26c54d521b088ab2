// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pdr/ad/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "pdr/ad/parallel.hpp"

namespace pdr::ad {

using detail::make_result;

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using CMapMat = Eigen::Map<const RowMat<T>>;

// c (+)= op(a) * op(b), with op(a) m x k and op(b) k x n, all row-major.
// Operands are copied into Eigen-owned storage first: Eigen's kernels peel
// loops by pointer alignment, and heap buffers land at different alignments
// from run to run, which would otherwise change the summation order.
template <typename T>
void gemm(const T* a, bool trans_a, const T* b, bool trans_b, T* c, std::int64_t m, std::int64_t k, std::int64_t n,
          bool accumulate) {
  RowMat<T> am = trans_a ? RowMat<T>(CMapMat<T>(a, k, m).transpose()) : RowMat<T>(CMapMat<T>(a, m, k));
  RowMat<T> bm = trans_b ? RowMat<T>(CMapMat<T>(b, n, k).transpose()) : RowMat<T>(CMapMat<T>(b, k, n));
  RowMat<T> cm(m, n);
  cm.noalias() = am * bm;
  const T* src = cm.data();
  const std::int64_t total = m * n;
  if (accumulate) {
    for (std::int64_t i = 0; i < total; ++i) c[i] += src[i];
  } else {
    std::copy(src, src + total, c);
  }
}

std::int64_t norm_axis(std::int64_t axis, std::int64_t rank, const Shape& shape) {
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank) {
    throw std::invalid_argument("axis out of range for shape " + shape_str(shape));
  }
  return axis;
}

// Splits shape around axis into [outer, len, inner].
struct AxisSplit {
  std::int64_t outer = 1, len = 1, inner = 1;
};

AxisSplit split_axis(const Shape& shape, std::int64_t axis) {
  AxisSplit s;
  for (std::int64_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.len = shape[axis];
  for (size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

struct Broadcast {
  Shape out;
  bool same = false;
  std::vector<std::int64_t> a_off, b_off;
};

Broadcast broadcast(const Shape& a, const Shape& b, std::string_view op) {
  Broadcast bc;
  if (a == b) {
    bc.out = a;
    bc.same = true;
    return bc;
  }
  const size_t r = std::max(a.size(), b.size());
  bc.out.assign(r, 1);
  std::vector<std::int64_t> sa(r, 0), sb(r, 0);
  std::int64_t stride_a = 1, stride_b = 1;
  for (size_t k = 0; k < r; ++k) {
    const size_t i = r - 1 - k;
    const std::int64_t da = k < a.size() ? a[a.size() - 1 - k] : 1;
    const std::int64_t db = k < b.size() ? b[b.size() - 1 - k] : 1;
    if (da != db && da != 1 && db != 1) {
      throw std::invalid_argument(std::string(op) + ": cannot broadcast " + shape_str(a) + " with " + shape_str(b));
    }
    bc.out[i] = std::max(da, db);
    sa[i] = (da == 1) ? 0 : stride_a;
    sb[i] = (db == 1) ? 0 : stride_b;
    stride_a *= da;
    stride_b *= db;
  }
  const std::int64_t n = numel(bc.out);
  bc.a_off.resize(n);
  bc.b_off.resize(n);
  std::vector<std::int64_t> idx(r, 0);
  std::int64_t oa = 0, ob = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    bc.a_off[i] = oa;
    bc.b_off[i] = ob;
    for (size_t d = r; d-- > 0;) {
      ++idx[d];
      oa += sa[d];
      ob += sb[d];
      if (idx[d] < bc.out[d]) break;
      oa -= sa[d] * idx[d];
      ob -= sb[d] * idx[d];
      idx[d] = 0;
    }
  }
  return bc;
}

// f(a, b) -> y;  da(a, b, y) and db(a, b, y) are local partials.
template <typename T, typename F, typename DA, typename DB>
Tensor<T> binary(std::string_view name, const Tensor<T>& a, const Tensor<T>& b, F f, DA da, DB db) {
  auto bc = std::make_shared<Broadcast>(broadcast(a.shape(), b.shape(), name));
  const auto av = a.data();
  const auto bv = b.data();
  const std::int64_t n = numel(bc->out);
  std::vector<T> y(static_cast<size_t>(n));
  if (bc->same) {
    for (std::int64_t i = 0; i < n; ++i) y[i] = f(av[i], bv[i]);
  } else {
    for (std::int64_t i = 0; i < n; ++i) y[i] = f(av[bc->a_off[i]], bv[bc->b_off[i]]);
  }
  return make_result<T>(name, bc->out, std::move(y), {a, b}, [bc, da, db](Node<T>& out) {
    auto& na = *out.inputs[0];
    auto& nb = *out.inputs[1];
    const auto& g = out.grad;
    const std::int64_t n = static_cast<std::int64_t>(g.size());
    if (na.requires_grad) {
      auto& ga = na.ensure_grad();
      for (std::int64_t i = 0; i < n; ++i) {
        const auto ia = bc->same ? i : bc->a_off[i];
        const auto ib = bc->same ? i : bc->b_off[i];
        ga[ia] += g[i] * da(na.value[ia], nb.value[ib], out.value[i]);
      }
    }
    if (nb.requires_grad) {
      auto& gb = nb.ensure_grad();
      for (std::int64_t i = 0; i < n; ++i) {
        const auto ia = bc->same ? i : bc->a_off[i];
        const auto ib = bc->same ? i : bc->b_off[i];
        gb[ib] += g[i] * db(na.value[ia], nb.value[ib], out.value[i]);
      }
    }
  });
}

// f(x) -> y;  d(x, y) is the local derivative.
template <typename T, typename F, typename D>
Tensor<T> unary(std::string_view name, const Tensor<T>& x, F f, D d) {
  const auto xv = x.data();
  std::vector<T> y(xv.size());
  for (size_t i = 0; i < xv.size(); ++i) y[i] = f(xv[i]);
  return make_result<T>(name, x.shape(), std::move(y), {x}, [d](Node<T>& out) {
    auto& in = *out.inputs[0];
    auto& gi = in.ensure_grad();
    for (size_t i = 0; i < gi.size(); ++i) gi[i] += out.grad[i] * d(in.value[i], out.value[i]);
  });
}

void require_rank(const Shape& s, size_t rank, std::string_view op) {
  if (s.size() != rank) {
    throw std::invalid_argument(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                                shape_str(s));
  }
}

// Row-major [rows = C*k*k] x [cols = n_images * oh * ow]; this fills image n.
template <typename T>
void im2col(const T* img, std::int64_t c, std::int64_t h, std::int64_t w, std::int64_t k, std::int64_t stride,
            std::int64_t pad, std::int64_t oh, std::int64_t ow, T* col, std::int64_t ld, std::int64_t col_offset) {
  for (std::int64_t ci = 0; ci < c; ++ci) {
    for (std::int64_t ki = 0; ki < k; ++ki) {
      for (std::int64_t kj = 0; kj < k; ++kj) {
        T* row = col + ((ci * k + ki) * k + kj) * ld + col_offset;
        for (std::int64_t y = 0; y < oh; ++y) {
          const std::int64_t iy = y * stride - pad + ki;
          for (std::int64_t x = 0; x < ow; ++x) {
            const std::int64_t ix = x * stride - pad + kj;
            row[y * ow + x] = (iy >= 0 && iy < h && ix >= 0 && ix < w) ? img[(ci * h + iy) * w + ix] : T(0);
          }
        }
      }
    }
  }
}

// Adjoint of im2col: accumulates columns back into image n.
template <typename T>
void col2im(const T* col, std::int64_t ld, std::int64_t col_offset, std::int64_t c, std::int64_t h, std::int64_t w,
            std::int64_t k, std::int64_t stride, std::int64_t pad, std::int64_t oh, std::int64_t ow, T* img) {
  for (std::int64_t ci = 0; ci < c; ++ci) {
    for (std::int64_t ki = 0; ki < k; ++ki) {
      for (std::int64_t kj = 0; kj < k; ++kj) {
        const T* row = col + ((ci * k + ki) * k + kj) * ld + col_offset;
        for (std::int64_t y = 0; y < oh; ++y) {
          const std::int64_t iy = y * stride - pad + ki;
          if (iy < 0 || iy >= h) continue;
          for (std::int64_t x = 0; x < ow; ++x) {
            const std::int64_t ix = x * stride - pad + kj;
            if (ix >= 0 && ix < w) img[(ci * h + iy) * w + ix] += row[y * ow + x];
          }
        }
      }
    }
  }
}

// [N, C, P] <-> [C, N*P]
template <typename T>
void nchw_to_cm(const T* src, std::int64_t n, std::int64_t c, std::int64_t p, T* dst) {
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t ci = 0; ci < c; ++ci)
      std::copy_n(src + (i * c + ci) * p, p, dst + ci * n * p + i * p);
}

template <typename T>
void cm_to_nchw(const T* src, std::int64_t n, std::int64_t c, std::int64_t p, T* dst) {
  for (std::int64_t i = 0; i < n; ++i)
    for (std::int64_t ci = 0; ci < c; ++ci)
      std::copy_n(src + ci * n * p + i * p, p, dst + (i * c + ci) * p);
}

}  // namespace

// ---------------------------------------------------------------------------
// Elementwise

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  return binary<T>(
      "add", a, b, [](T x, T y) { return x + y; }, [](T, T, T) { return T(1); }, [](T, T, T) { return T(1); });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  return binary<T>(
      "sub", a, b, [](T x, T y) { return x - y; }, [](T, T, T) { return T(1); }, [](T, T, T) { return T(-1); });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  return binary<T>(
      "mul", a, b, [](T x, T y) { return x * y; }, [](T, T y, T) { return y; }, [](T x, T, T) { return x; });
}

template <typename T>
Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b) {
  return binary<T>(
      "div", a, b, [](T x, T y) { return x / y; }, [](T, T y, T) { return T(1) / y; },
      [](T, T y, T out) { return -out / y; });
}

template <typename T>
Tensor<T> neg(const Tensor<T>& x) {
  return unary<T>("neg", x, [](T v) { return -v; }, [](T, T) { return T(-1); });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
  return unary<T>("scale", x, [factor](T v) { return v * factor; }, [factor](T, T) { return factor; });
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& x, T offset) {
  return unary<T>("add_scalar", x, [offset](T v) { return v + offset; }, [](T, T) { return T(1); });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  return unary<T>(
      "relu", x, [](T v) { return v > T(0) ? v : T(0); }, [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> tanh(const Tensor<T>& x) {
  return unary<T>("tanh", x, [](T v) { return std::tanh(v); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  return unary<T>(
      "sigmoid", x,
      [](T v) {
        if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
        const T e = std::exp(v);
        return e / (T(1) + e);
      },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Tensor<T> exp(const Tensor<T>& x) {
  return unary<T>("exp", x, [](T v) { return std::exp(v); }, [](T, T y) { return y; });
}

template <typename T>
Tensor<T> log(const Tensor<T>& x) {
  return unary<T>("log", x, [](T v) { return std::log(v); }, [](T v, T) { return T(1) / v; });
}

template <typename T>
Tensor<T> abs(const Tensor<T>& x) {
  return unary<T>(
      "abs", x, [](T v) { return std::abs(v); },
      [](T v, T) { return v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0)); });
}

template <typename T>
Tensor<T> sqrt(const Tensor<T>& x) {
  return unary<T>("sqrt", x, [](T v) { return std::sqrt(v); }, [](T, T y) { return T(0.5) / y; });
}

template <typename T>
Tensor<T> square(const Tensor<T>& x) {
  return unary<T>("square", x, [](T v) { return v * v; }, [](T v, T) { return T(2) * v; });
}

template <typename T>
Tensor<T> sin(const Tensor<T>& x) {
  return unary<T>("sin", x, [](T v) { return std::sin(v); }, [](T v, T) { return std::cos(v); });
}

template <typename T>
Tensor<T> cos(const Tensor<T>& x) {
  return unary<T>("cos", x, [](T v) { return std::cos(v); }, [](T v, T) { return -std::sin(v); });
}

template <typename T>
Tensor<T> clamp(const Tensor<T>& x, T lo, T hi) {
  if (!(lo <= hi)) throw std::invalid_argument("clamp: lo > hi");
  return unary<T>(
      "clamp", x, [lo, hi](T v) { return std::clamp(v, lo, hi); },
      [lo, hi](T v, T) { return (v > lo && v < hi) ? T(1) : T(0); });
}

// ---------------------------------------------------------------------------
// Reductions

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  T s = T(0);
  for (T v : x.data()) s += v;
  return make_result<T>("sum", {1}, {s}, {x}, [](Node<T>& out) {
    auto& gi = out.inputs[0]->ensure_grad();
    const T g = out.grad[0];
    for (auto& v : gi) v += g;
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x) {
  return scale(sum(x), T(1) / static_cast<T>(x.numel()));
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x, std::int64_t axis, bool keepdim) {
  axis = norm_axis(axis, x.rank(), x.shape());
  const auto s = split_axis(x.shape(), axis);
  Shape out_shape = x.shape();
  if (keepdim || out_shape.size() == 1) {
    out_shape[axis] = 1;
  } else {
    out_shape.erase(out_shape.begin() + axis);
  }
  const auto xv = x.data();
  std::vector<T> y(static_cast<size_t>(s.outer * s.inner), T(0));
  for (std::int64_t o = 0; o < s.outer; ++o)
    for (std::int64_t l = 0; l < s.len; ++l)
      for (std::int64_t i = 0; i < s.inner; ++i) y[o * s.inner + i] += xv[(o * s.len + l) * s.inner + i];
  return make_result<T>("sum_axis", std::move(out_shape), std::move(y), {x}, [s](Node<T>& out) {
    auto& gi = out.inputs[0]->ensure_grad();
    for (std::int64_t o = 0; o < s.outer; ++o)
      for (std::int64_t l = 0; l < s.len; ++l)
        for (std::int64_t i = 0; i < s.inner; ++i) gi[(o * s.len + l) * s.inner + i] += out.grad[o * s.inner + i];
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x, std::int64_t axis, bool keepdim) {
  const auto len = x.dim(axis);
  return scale(sum(x, axis, keepdim), T(1) / static_cast<T>(len));
}

// ---------------------------------------------------------------------------
// Shape manipulation

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  std::int64_t infer = -1, known = 1;
  for (size_t i = 0; i < shape.size(); ++i) {
    if (shape[i] == -1) {
      if (infer >= 0) throw std::invalid_argument("reshape: more than one -1 in " + shape_str(shape));
      infer = static_cast<std::int64_t>(i);
    } else {
      known *= shape[i];
    }
  }
  if (infer >= 0 && known > 0 && x.numel() % known == 0) shape[infer] = x.numel() / known;
  if (numel(shape) != x.numel()) {
    throw std::invalid_argument("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  }
  std::vector<T> y(x.data().begin(), x.data().end());
  return make_result<T>("reshape", std::move(shape), std::move(y), {x}, [](Node<T>& out) {
    auto& gi = out.inputs[0]->ensure_grad();
    for (size_t i = 0; i < gi.size(); ++i) gi[i] += out.grad[i];
  });
}

template <typename T>
Tensor<T> permute(const Tensor<T>& x, const std::vector<std::int64_t>& dims) {
  const auto r = x.rank();
  if (static_cast<std::int64_t>(dims.size()) != r) {
    throw std::invalid_argument("permute: dims do not match rank of " + shape_str(x.shape()));
  }
  std::vector<bool> used(r, false);
  for (auto d : dims) {
    if (d < 0 || d >= r || used[d]) throw std::invalid_argument("permute: invalid permutation");
    used[d] = true;
  }
  const auto& in_shape = x.shape();
  std::vector<std::int64_t> in_stride(r, 1);
  for (std::int64_t i = r - 2; i >= 0; --i) in_stride[i] = in_stride[i + 1] * in_shape[i + 1];
  Shape out_shape(r);
  std::vector<std::int64_t> src_stride(r);
  for (std::int64_t i = 0; i < r; ++i) {
    out_shape[i] = in_shape[dims[i]];
    src_stride[i] = in_stride[dims[i]];
  }
  const std::int64_t n = x.numel();
  auto map = std::make_shared<std::vector<std::int64_t>>(n);
  std::vector<std::int64_t> idx(r, 0);
  std::int64_t off = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    (*map)[i] = off;
    for (std::int64_t d = r - 1; d >= 0; --d) {
      ++idx[d];
      off += src_stride[d];
      if (idx[d] < out_shape[d]) break;
      off -= src_stride[d] * idx[d];
      idx[d] = 0;
    }
  }
  const auto xv = x.data();
  std::vector<T> y(n);
  for (std::int64_t i = 0; i < n; ++i) y[i] = xv[(*map)[i]];
  return make_result<T>("permute", std::move(out_shape), std::move(y), {x}, [map](Node<T>& out) {
    auto& gi = out.inputs[0]->ensure_grad();
    for (size_t i = 0; i < out.grad.size(); ++i) gi[(*map)[i]] += out.grad[i];
  });
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& x) {
  require_rank(x.shape(), 2, "transpose");
  return permute(x, {1, 0});
}

template <typename T>
Tensor<T> slice(const Tensor<T>& x, std::int64_t axis, std::int64_t start, std::int64_t length) {
  axis = norm_axis(axis, x.rank(), x.shape());
  const auto s = split_axis(x.shape(), axis);
  if (start < 0 || length <= 0 || start + length > s.len) {
    throw std::invalid_argument("slice [" + std::to_string(start) + ", +" + std::to_string(length) +
                                ") out of range for " + shape_str(x.shape()));
  }
  Shape out_shape = x.shape();
  out_shape[axis] = length;
  const auto xv = x.data();
  std::vector<T> y(static_cast<size_t>(s.outer * length * s.inner));
  for (std::int64_t o = 0; o < s.outer; ++o)
    std::copy_n(xv.data() + (o * s.len + start) * s.inner, length * s.inner, y.data() + o * length * s.inner);
  return make_result<T>("slice", std::move(out_shape), std::move(y), {x}, [s, start, length](Node<T>& out) {
    auto& gi = out.inputs[0]->ensure_grad();
    for (std::int64_t o = 0; o < s.outer; ++o)
      for (std::int64_t j = 0; j < length * s.inner; ++j)
        gi[(o * s.len + start) * s.inner + j] += out.grad[o * length * s.inner + j];
  });
}

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::int64_t axis) {
  if (parts.empty()) throw std::invalid_argument("concat: no inputs");
  const auto& first = parts[0].shape();
  axis = norm_axis(axis, static_cast<std::int64_t>(first.size()), first);
  Shape out_shape = first;
  out_shape[axis] = 0;
  std::vector<std::int64_t> lens;
  for (const auto& p : parts) {
    const auto& s = p.shape();
    bool ok = s.size() == first.size();
    for (size_t i = 0; ok && i < s.size(); ++i) ok = (static_cast<std::int64_t>(i) == axis) || s[i] == first[i];
    if (!ok) {
      throw std::invalid_argument("concat: incompatible shapes " + shape_str(first) + " and " + shape_str(s));
    }
    lens.push_back(s[axis]);
    out_shape[axis] += s[axis];
  }
  const auto s = split_axis(out_shape, axis);
  std::vector<T> y(static_cast<size_t>(numel(out_shape)));
  std::int64_t at = 0;
  for (size_t p = 0; p < parts.size(); ++p) {
    const auto pv = parts[p].data();
    const auto chunk = lens[p] * s.inner;
    for (std::int64_t o = 0; o < s.outer; ++o)
      std::copy_n(pv.data() + o * chunk, chunk, y.data() + (o * s.len + at) * s.inner);
    at += lens[p];
  }
  return make_result<T>("concat", std::move(out_shape), std::move(y), parts, [s, lens](Node<T>& out) {
    std::int64_t at = 0;
    for (size_t p = 0; p < lens.size(); ++p) {
      auto& in = *out.inputs[p];
      const auto chunk = lens[p] * s.inner;
      if (in.requires_grad) {
        auto& gi = in.ensure_grad();
        for (std::int64_t o = 0; o < s.outer; ++o)
          for (std::int64_t j = 0; j < chunk; ++j) gi[o * chunk + j] += out.grad[(o * s.len + at) * s.inner + j];
      }
      at += lens[p];
    }
  });
}

// ---------------------------------------------------------------------------
// Linear algebra

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  const auto& sa = a.shape();
  const auto& sb = b.shape();
  const bool batched = sa.size() == 3;
  if (!((sa.size() == 2 && sb.size() == 2) || (sa.size() == 3 && sb.size() == 3 && sa[0] == sb[0])) ||
      sa.back() != sb[sb.size() - 2]) {
    throw std::invalid_argument("matmul: shape mismatch " + shape_str(sa) + " x " + shape_str(sb));
  }
  const std::int64_t batch = batched ? sa[0] : 1;
  const std::int64_t m = sa[sa.size() - 2], k = sa.back(), n = sb.back();
  Shape out_shape = batched ? Shape{batch, m, n} : Shape{m, n};
  std::vector<T> y(static_cast<size_t>(batch * m * n));
  for (std::int64_t i = 0; i < batch; ++i) {
    gemm(a.data().data() + i * m * k, false, b.data().data() + i * k * n, false, y.data() + i * m * n, m, k, n, false);
  }
  return make_result<T>("matmul", std::move(out_shape), std::move(y), {a, b}, [batch, m, k, n](Node<T>& out) {
    auto& na = *out.inputs[0];
    auto& nb = *out.inputs[1];
    for (std::int64_t i = 0; i < batch; ++i) {
      const T* g = out.grad.data() + i * m * n;
      if (na.requires_grad) {
        gemm(g, false, nb.value.data() + i * k * n, true, na.ensure_grad().data() + i * m * k, m, n, k, true);
      }
      if (nb.requires_grad) {
        gemm(na.value.data() + i * m * k, true, g, false, nb.ensure_grad().data() + i * k * n, k, m, n, true);
      }
    }
  });
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias, std::int64_t stride,
                 std::int64_t padding) {
  require_rank(x.shape(), 4, "conv2d input");
  require_rank(weight.shape(), 4, "conv2d weight");
  const auto n = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
  const auto cout = weight.dim(0), k = weight.dim(2);
  if (weight.dim(1) != cin || weight.dim(3) != k) {
    throw std::invalid_argument("conv2d: weight " + shape_str(weight.shape()) + " incompatible with input " +
                                shape_str(x.shape()));
  }
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != cout)) {
    throw std::invalid_argument("conv2d: bias " + shape_str(bias.shape()) + " must be [" + std::to_string(cout) + "]");
  }
  if (stride < 1 || padding < 0) throw std::invalid_argument("conv2d: invalid stride/padding");
  const auto oh = (h + 2 * padding - k) / stride + 1;
  const auto ow = (w + 2 * padding - k) / stride + 1;
  if (oh <= 0 || ow <= 0) throw std::invalid_argument("conv2d: kernel larger than padded input " + shape_str(x.shape()));
  const auto p = oh * ow, kk = cin * k * k, np = n * p;

  auto col = std::make_shared<std::vector<T>>(static_cast<size_t>(kk * np));
  const T* xv = x.data().data();
  parallel_for(n, [&](std::int64_t i) {
    im2col(xv + i * cin * h * w, cin, h, w, k, stride, padding, oh, ow, col->data(), np, i * p);
  });
  std::vector<T> ycm(static_cast<size_t>(cout * np));
  gemm(weight.data().data(), false, col->data(), false, ycm.data(), cout, kk, np, false);
  if (bias.defined()) {
    for (std::int64_t c = 0; c < cout; ++c)
      for (std::int64_t j = 0; j < np; ++j) ycm[static_cast<size_t>(c * np + j)] += bias.data()[c];
  }
  std::vector<T> y(static_cast<size_t>(n * cout * p));
  cm_to_nchw(ycm.data(), n, cout, p, y.data());

  std::vector<Tensor<T>> inputs{x, weight};
  if (bias.defined()) inputs.push_back(bias);
  return make_result<T>(
      "conv2d", Shape{n, cout, oh, ow}, std::move(y), std::move(inputs),
      [col, n, cin, h, w, cout, k, stride, padding, oh, ow, p, kk, np](Node<T>& out) {
        std::vector<T> gcm(static_cast<size_t>(cout * np));
        nchw_to_cm(out.grad.data(), n, cout, p, gcm.data());
        auto& nx = *out.inputs[0];
        auto& nw = *out.inputs[1];
        if (nw.requires_grad) gemm(gcm.data(), false, col->data(), true, nw.ensure_grad().data(), cout, np, kk, true);
        if (out.inputs.size() > 2 && out.inputs[2]->requires_grad) {
          auto& gb = out.inputs[2]->ensure_grad();
          const T* gp = gcm.data();
          for (std::int64_t c = 0; c < cout; ++c) {
            T acc = T(0);
            for (std::int64_t j = 0; j < np; ++j) acc += gp[c * np + j];
            gb[c] += acc;
          }
        }
        if (nx.requires_grad) {
          std::vector<T> dcol(static_cast<size_t>(kk * np));
          gemm(nw.value.data(), true, gcm.data(), false, dcol.data(), kk, cout, np, false);
          auto& gx = nx.ensure_grad();
          parallel_for(n, [&](std::int64_t i) {
            col2im(dcol.data(), np, i * p, cin, h, w, k, stride, padding, oh, ow, gx.data() + i * cin * h * w);
          });
        }
      });
}

template <typename T>
Tensor<T> conv_transpose2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias, std::int64_t stride,
                           std::int64_t padding) {
  require_rank(x.shape(), 4, "conv_transpose2d input");
  require_rank(weight.shape(), 4, "conv_transpose2d weight");
  const auto n = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
  const auto cout = weight.dim(1), k = weight.dim(2);
  if (weight.dim(0) != cin || weight.dim(3) != k) {
    throw std::invalid_argument("conv_transpose2d: weight " + shape_str(weight.shape()) +
                                " incompatible with input " + shape_str(x.shape()));
  }
  if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != cout)) {
    throw std::invalid_argument("conv_transpose2d: bias " + shape_str(bias.shape()) + " must be [" +
                                std::to_string(cout) + "]");
  }
  if (stride < 1 || padding < 0) throw std::invalid_argument("conv_transpose2d: invalid stride/padding");
  const auto oh = (h - 1) * stride - 2 * padding + k;
  const auto ow = (w - 1) * stride - 2 * padding + k;
  if (oh <= 0 || ow <= 0) throw std::invalid_argument("conv_transpose2d: empty output");
  const auto p = h * w, kk = cout * k * k, np = n * p;

  auto xcm = std::make_shared<std::vector<T>>(static_cast<size_t>(cin * np));
  nchw_to_cm(x.data().data(), n, cin, p, xcm->data());
  std::vector<T> col(static_cast<size_t>(kk * np));
  gemm(weight.data().data(), true, xcm->data(), false, col.data(), kk, cin, np, false);
  std::vector<T> y(static_cast<size_t>(n * cout * oh * ow), T(0));
  parallel_for(n, [&](std::int64_t i) {
    col2im(col.data(), np, i * p, cout, oh, ow, k, stride, padding, h, w, y.data() + i * cout * oh * ow);
  });
  if (bias.defined()) {
    const auto bv = bias.data();
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t c = 0; c < cout; ++c)
        for (std::int64_t j = 0; j < oh * ow; ++j) y[(i * cout + c) * oh * ow + j] += bv[c];
  }

  std::vector<Tensor<T>> inputs{x, weight};
  if (bias.defined()) inputs.push_back(bias);
  return make_result<T>(
      "conv_transpose2d", Shape{n, cout, oh, ow}, std::move(y), std::move(inputs),
      [xcm, n, cin, h, w, cout, k, stride, padding, oh, ow, p, kk, np](Node<T>& out) {
        std::vector<T> dcol(static_cast<size_t>(kk * np));
        const T* g = out.grad.data();
        parallel_for(n, [&](std::int64_t i) {
          im2col(g + i * cout * oh * ow, cout, oh, ow, k, stride, padding, h, w, dcol.data(), np, i * p);
        });
        auto& nx = *out.inputs[0];
        auto& nw = *out.inputs[1];
        if (nw.requires_grad) gemm(xcm->data(), false, dcol.data(), true, nw.ensure_grad().data(), cin, np, kk, true);
        if (out.inputs.size() > 2 && out.inputs[2]->requires_grad) {
          auto& gb = out.inputs[2]->ensure_grad();
          for (std::int64_t i = 0; i < n; ++i)
            for (std::int64_t c = 0; c < cout; ++c) {
              T s = T(0);
              for (std::int64_t j = 0; j < oh * ow; ++j) s += g[(i * cout + c) * oh * ow + j];
              gb[c] += s;
            }
        }
        if (nx.requires_grad) {
          std::vector<T> gxcm(static_cast<size_t>(cin * np));
          gemm(nw.value.data(), false, dcol.data(), false, gxcm.data(), cin, kk, np, false);
          std::vector<T> gx(static_cast<size_t>(n * cin * p));
          cm_to_nchw(gxcm.data(), n, cin, p, gx.data());
          auto& acc = nx.ensure_grad();
          for (size_t i = 0; i < acc.size(); ++i) acc[i] += gx[i];
        }
      });
}

// ---------------------------------------------------------------------------
// Last-axis normalizations

template <typename T>
Tensor<T> softmax(const Tensor<T>& x) {
  const auto c = x.shape().back();
  const auto rows = x.numel() / c;
  const auto xv = x.data();
  std::vector<T> y(xv.size());
  for (std::int64_t r = 0; r < rows; ++r) {
    const T* in = xv.data() + r * c;
    T* o = y.data() + r * c;
    const T mx = *std::max_element(in, in + c);
    T s = T(0);
    for (std::int64_t j = 0; j < c; ++j) s += (o[j] = std::exp(in[j] - mx));
    for (std::int64_t j = 0; j < c; ++j) o[j] /= s;
  }
  return make_result<T>("softmax", x.shape(), std::move(y), {x}, [rows, c](Node<T>& out) {
    auto& gi = out.inputs[0]->ensure_grad();
    for (std::int64_t r = 0; r < rows; ++r) {
      const T* yv = out.value.data() + r * c;
      const T* g = out.grad.data() + r * c;
      T dot = T(0);
      for (std::int64_t j = 0; j < c; ++j) dot += g[j] * yv[j];
      for (std::int64_t j = 0; j < c; ++j) gi[r * c + j] += yv[j] * (g[j] - dot);
    }
  });
}

template <typename T>
Tensor<T> log_softmax(const Tensor<T>& x) {
  const auto c = x.shape().back();
  const auto rows = x.numel() / c;
  const auto xv = x.data();
  std::vector<T> y(xv.size());
  for (std::int64_t r = 0; r < rows; ++r) {
    const T* in = xv.data() + r * c;
    const T mx = *std::max_element(in, in + c);
    T s = T(0);
    for (std::int64_t j = 0; j < c; ++j) s += std::exp(in[j] - mx);
    const T lse = mx + std::log(s);
    for (std::int64_t j = 0; j < c; ++j) y[r * c + j] = in[j] - lse;
  }
  return make_result<T>("log_softmax", x.shape(), std::move(y), {x}, [rows, c](Node<T>& out) {
    auto& gi = out.inputs[0]->ensure_grad();
    for (std::int64_t r = 0; r < rows; ++r) {
      const T* yv = out.value.data() + r * c;
      const T* g = out.grad.data() + r * c;
      T gs = T(0);
      for (std::int64_t j = 0; j < c; ++j) gs += g[j];
      for (std::int64_t j = 0; j < c; ++j) gi[r * c + j] += g[j] - std::exp(yv[j]) * gs;
    }
  });
}

template <typename T>
Tensor<T> l2_normalize(const Tensor<T>& x, T eps) {
  const auto c = x.shape().back();
  const auto rows = x.numel() / c;
  const auto xv = x.data();
  std::vector<T> y(xv.size());
  auto norms = std::make_shared<std::vector<T>>(rows);
  for (std::int64_t r = 0; r < rows; ++r) {
    T s = T(0);
    for (std::int64_t j = 0; j < c; ++j) s += xv[r * c + j] * xv[r * c + j];
    const T nrm = std::max(std::sqrt(s), eps);
    (*norms)[r] = nrm;
    for (std::int64_t j = 0; j < c; ++j) y[r * c + j] = xv[r * c + j] / nrm;
  }
  return make_result<T>("l2_normalize", x.shape(), std::move(y), {x}, [rows, c, norms, eps](Node<T>& out) {
    auto& gi = out.inputs[0]->ensure_grad();
    for (std::int64_t r = 0; r < rows; ++r) {
      const T nrm = (*norms)[r];
      const T* yv = out.value.data() + r * c;
      const T* g = out.grad.data() + r * c;
      if (nrm <= eps) {
        for (std::int64_t j = 0; j < c; ++j) gi[r * c + j] += g[j] / nrm;
        continue;
      }
      T dot = T(0);
      for (std::int64_t j = 0; j < c; ++j) dot += g[j] * yv[j];
      for (std::int64_t j = 0; j < c; ++j) gi[r * c + j] += (g[j] - yv[j] * dot) / nrm;
    }
  });
}

// ---------------------------------------------------------------------------
// Sampling and scattering

template <typename T>
Tensor<T> grid_sample(const Tensor<T>& img, const Tensor<T>& grid) {
  require_rank(img.shape(), 4, "grid_sample image");
  require_rank(grid.shape(), 4, "grid_sample grid");
  const auto n = img.dim(0), c = img.dim(1), h = img.dim(2), w = img.dim(3);
  const auto oh = grid.dim(1), ow = grid.dim(2);
  if (grid.dim(0) != n || grid.dim(3) != 2) {
    throw std::invalid_argument("grid_sample: grid " + shape_str(grid.shape()) + " incompatible with image " +
                                shape_str(img.shape()));
  }
  struct Tap {
    std::int64_t x0, y0, x1, y1;
    T fx, fy, sx, sy;  // sx/sy: d(pixel coord)/d(grid coord), 0 when clamped
  };
  auto taps = std::make_shared<std::vector<Tap>>(static_cast<size_t>(n * oh * ow));
  const auto gv = grid.data();
  const auto iv = img.data();
  std::vector<T> y(static_cast<size_t>(n * c * oh * ow));
  auto locate = [](T coord, std::int64_t size, std::int64_t& i0, std::int64_t& i1, T& f, T& slope) {
    const T half = T(size - 1) / T(2);
    slope = (coord > T(-1) && coord < T(1)) ? half : T(0);
    const T pix = (std::clamp(coord, T(-1), T(1)) + T(1)) * half;
    if (size == 1) {
      i0 = i1 = 0;
      f = T(0);
      return;
    }
    i0 = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(pix)), size - 2);
    i1 = i0 + 1;
    f = pix - T(i0);
  };
  for (std::int64_t b = 0; b < n; ++b) {
    for (std::int64_t q = 0; q < oh * ow; ++q) {
      Tap t{};
      const auto gi = (b * oh * ow + q) * 2;
      locate(gv[gi], w, t.x0, t.x1, t.fx, t.sx);
      locate(gv[gi + 1], h, t.y0, t.y1, t.fy, t.sy);
      (*taps)[b * oh * ow + q] = t;
      for (std::int64_t ch = 0; ch < c; ++ch) {
        const T* im = iv.data() + (b * c + ch) * h * w;
        y[(b * c + ch) * oh * ow + q] = (T(1) - t.fy) * ((T(1) - t.fx) * im[t.y0 * w + t.x0] + t.fx * im[t.y0 * w + t.x1]) +
                                       t.fy * ((T(1) - t.fx) * im[t.y1 * w + t.x0] + t.fx * im[t.y1 * w + t.x1]);
      }
    }
  }
  return make_result<T>("grid_sample", Shape{n, c, oh, ow}, std::move(y), {img, grid},
                        [taps, n, c, h, w, oh, ow](Node<T>& out) {
                          auto& ni = *out.inputs[0];
                          auto& ng = *out.inputs[1];
                          for (std::int64_t b = 0; b < n; ++b) {
                            for (std::int64_t q = 0; q < oh * ow; ++q) {
                              const Tap& t = (*taps)[b * oh * ow + q];
                              T dgx = T(0), dgy = T(0);
                              for (std::int64_t ch = 0; ch < c; ++ch) {
                                const T g = out.grad[(b * c + ch) * oh * ow + q];
                                const auto base = (b * c + ch) * h * w;
                                const T* im = ni.value.data() + base;
                                if (ni.requires_grad) {
                                  auto& gi = ni.ensure_grad();
                                  gi[base + t.y0 * w + t.x0] += g * (T(1) - t.fy) * (T(1) - t.fx);
                                  gi[base + t.y0 * w + t.x1] += g * (T(1) - t.fy) * t.fx;
                                  gi[base + t.y1 * w + t.x0] += g * t.fy * (T(1) - t.fx);
                                  gi[base + t.y1 * w + t.x1] += g * t.fy * t.fx;
                                }
                                const T v00 = im[t.y0 * w + t.x0], v01 = im[t.y0 * w + t.x1];
                                const T v10 = im[t.y1 * w + t.x0], v11 = im[t.y1 * w + t.x1];
                                dgx += g * ((T(1) - t.fy) * (v01 - v00) + t.fy * (v11 - v10));
                                dgy += g * ((T(1) - t.fx) * (v10 - v00) + t.fx * (v11 - v01));
                              }
                              if (ng.requires_grad) {
                                auto& gg = ng.ensure_grad();
                                gg[(b * oh * ow + q) * 2] += dgx * t.sx;
                                gg[(b * oh * ow + q) * 2 + 1] += dgy * t.sy;
                              }
                            }
                          }
                        });
}

template <typename T>
Tensor<T> scatter_add(const Tensor<T>& src, std::span<const std::int64_t> index, std::int64_t out_len) {
  if (src.rank() != 2 && src.rank() != 3) {
    throw std::invalid_argument("scatter_add: src must be [B,M] or [B,M,C], got " + shape_str(src.shape()));
  }
  const auto b = src.dim(0), m = src.dim(1), c = src.rank() == 3 ? src.dim(2) : 1;
  if (static_cast<std::int64_t>(index.size()) != b * m) {
    throw std::invalid_argument("scatter_add: index has " + std::to_string(index.size()) + " entries for src " +
                                shape_str(src.shape()));
  }
  auto idx = std::make_shared<std::vector<std::int64_t>>(index.begin(), index.end());
  for (auto i : *idx) {
    if (i < -1 || i >= out_len) throw std::invalid_argument("scatter_add: index " + std::to_string(i) + " out of range");
  }
  Shape out_shape = src.rank() == 3 ? Shape{b, out_len, c} : Shape{b, out_len};
  const auto sv = src.data();
  std::vector<T> y(static_cast<size_t>(b * out_len * c), T(0));
  for (std::int64_t bi = 0; bi < b; ++bi)
    for (std::int64_t j = 0; j < m; ++j) {
      const auto t = (*idx)[bi * m + j];
      if (t < 0) continue;
      for (std::int64_t ch = 0; ch < c; ++ch) y[(bi * out_len + t) * c + ch] += sv[(bi * m + j) * c + ch];
    }
  return make_result<T>("scatter_add", std::move(out_shape), std::move(y), {src}, [idx, b, m, c, out_len](Node<T>& out) {
    auto& gi = out.inputs[0]->ensure_grad();
    for (std::int64_t bi = 0; bi < b; ++bi)
      for (std::int64_t j = 0; j < m; ++j) {
        const auto t = (*idx)[bi * m + j];
        if (t < 0) continue;
        for (std::int64_t ch = 0; ch < c; ++ch) gi[(bi * m + j) * c + ch] += out.grad[(bi * out_len + t) * c + ch];
      }
  });
}

template <typename T>
Tensor<T> gather(const Tensor<T>& src, std::span<const std::int64_t> index, std::int64_t m) {
  if (src.rank() != 2 && src.rank() != 3) {
    throw std::invalid_argument("gather: src must be [B,L] or [B,L,C], got " + shape_str(src.shape()));
  }
  const auto b = src.dim(0), len = src.dim(1), c = src.rank() == 3 ? src.dim(2) : 1;
  if (static_cast<std::int64_t>(index.size()) != b * m) {
    throw std::invalid_argument("gather: index has " + std::to_string(index.size()) + " entries, expected " +
                                std::to_string(b * m));
  }
  auto idx = std::make_shared<std::vector<std::int64_t>>(index.begin(), index.end());
  for (auto i : *idx) {
    if (i < -1 || i >= len) throw std::invalid_argument("gather: index " + std::to_string(i) + " out of range");
  }
  Shape out_shape = src.rank() == 3 ? Shape{b, m, c} : Shape{b, m};
  const auto sv = src.data();
  std::vector<T> y(static_cast<size_t>(b * m * c), T(0));
  for (std::int64_t bi = 0; bi < b; ++bi)
    for (std::int64_t j = 0; j < m; ++j) {
      const auto t = (*idx)[bi * m + j];
      if (t < 0) continue;
      for (std::int64_t ch = 0; ch < c; ++ch) y[(bi * m + j) * c + ch] = sv[(bi * len + t) * c + ch];
    }
  return make_result<T>("gather", std::move(out_shape), std::move(y), {src}, [idx, b, m, c, len](Node<T>& out) {
    auto& gi = out.inputs[0]->ensure_grad();
    for (std::int64_t bi = 0; bi < b; ++bi)
      for (std::int64_t j = 0; j < m; ++j) {
        const auto t = (*idx)[bi * m + j];
        if (t < 0) continue;
        for (std::int64_t ch = 0; ch < c; ++ch) gi[(bi * len + t) * c + ch] += out.grad[(bi * m + j) * c + ch];
      }
  });
}

template <typename T>
Tensor<T> finite_difference(const Tensor<T>& x, std::int64_t axis) {
  axis = norm_axis(axis, x.rank(), x.shape());
  const auto s = split_axis(x.shape(), axis);
  const auto xv = x.data();
  std::vector<T> y(xv.size(), T(0));
  // y[l] = sum_t coef * x[src]; the same stencil drives the adjoint.
  auto stencil = [len = s.len](std::int64_t l, auto&& emit) {
    if (len == 1) return;
    if (l == 0) {
      emit(1, T(1));
      emit(0, T(-1));
    } else if (l == len - 1) {
      emit(len - 1, T(1));
      emit(len - 2, T(-1));
    } else {
      emit(l + 1, T(0.5));
      emit(l - 1, T(-0.5));
    }
  };
  for (std::int64_t o = 0; o < s.outer; ++o)
    for (std::int64_t l = 0; l < s.len; ++l)
      for (std::int64_t i = 0; i < s.inner; ++i) {
        T acc = T(0);
        stencil(l, [&](std::int64_t src, T coef) { acc += coef * xv[(o * s.len + src) * s.inner + i]; });
        y[(o * s.len + l) * s.inner + i] = acc;
      }
  return make_result<T>("finite_difference", x.shape(), std::move(y), {x}, [s, stencil](Node<T>& out) {
    auto& gi = out.inputs[0]->ensure_grad();
    for (std::int64_t o = 0; o < s.outer; ++o)
      for (std::int64_t l = 0; l < s.len; ++l)
        for (std::int64_t i = 0; i < s.inner; ++i) {
          const T g = out.grad[(o * s.len + l) * s.inner + i];
          stencil(l, [&](std::int64_t src, T coef) { gi[(o * s.len + src) * s.inner + i] += coef * g; });
        }
  });
}

// ---------------------------------------------------------------------------

#define PDR_INSTANTIATE_OPS(T)                                                                             \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                              \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                              \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                              \
  template Tensor<T> div(const Tensor<T>&, const Tensor<T>&);                                              \
  template Tensor<T> neg(const Tensor<T>&);                                                                \
  template Tensor<T> scale(const Tensor<T>&, T);                                                           \
  template Tensor<T> add_scalar(const Tensor<T>&, T);                                                      \
  template Tensor<T> relu(const Tensor<T>&);                                                               \
  template Tensor<T> tanh(const Tensor<T>&);                                                               \
  template Tensor<T> sigmoid(const Tensor<T>&);                                                            \
  template Tensor<T> exp(const Tensor<T>&);                                                                \
  template Tensor<T> log(const Tensor<T>&);                                                                \
  template Tensor<T> abs(const Tensor<T>&);                                                                \
  template Tensor<T> sqrt(const Tensor<T>&);                                                               \
  template Tensor<T> square(const Tensor<T>&);                                                             \
  template Tensor<T> sin(const Tensor<T>&);                                                                \
  template Tensor<T> cos(const Tensor<T>&);                                                                \
  template Tensor<T> clamp(const Tensor<T>&, T, T);                                                        \
  template Tensor<T> sum(const Tensor<T>&);                                                                \
  template Tensor<T> mean(const Tensor<T>&);                                                               \
  template Tensor<T> sum(const Tensor<T>&, std::int64_t, bool);                                            \
  template Tensor<T> mean(const Tensor<T>&, std::int64_t, bool);                                           \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                                     \
  template Tensor<T> permute(const Tensor<T>&, const std::vector<std::int64_t>&);                          \
  template Tensor<T> transpose(const Tensor<T>&);                                                          \
  template Tensor<T> slice(const Tensor<T>&, std::int64_t, std::int64_t, std::int64_t);                    \
  template Tensor<T> concat(const std::vector<Tensor<T>>&, std::int64_t);                                  \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                                           \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, std::int64_t, std::int64_t); \
  template Tensor<T> conv_transpose2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, std::int64_t,    \
                                      std::int64_t);                                                       \
  template Tensor<T> softmax(const Tensor<T>&);                                                            \
  template Tensor<T> log_softmax(const Tensor<T>&);                                                        \
  template Tensor<T> l2_normalize(const Tensor<T>&, T);                                                    \
  template Tensor<T> grid_sample(const Tensor<T>&, const Tensor<T>&);                                      \
  template Tensor<T> scatter_add(const Tensor<T>&, std::span<const std::int64_t>, std::int64_t);           \
  template Tensor<T> gather(const Tensor<T>&, std::span<const std::int64_t>, std::int64_t);                \
  template Tensor<T> finite_difference(const Tensor<T>&, std::int64_t);

PDR_INSTANTIATE_OPS(float)
PDR_INSTANTIATE_OPS(double)

#undef PDR_INSTANTIATE_OPS

}  // namespace pdr::ad
