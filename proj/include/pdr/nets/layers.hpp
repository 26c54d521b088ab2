// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pdr/ad/tensor.hpp"
#include "pdr/rng.hpp"

namespace pdr::nets {

template <typename T>
using NamedParams = std::vector<std::pair<std::string, ad::Tensor<T>>>;

/// Parameters are drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
template <typename T>
ad::Tensor<T> uniform_fan_in(ad::Shape shape, double fan_in, Rng& rng);

/// y = x W + b; x [N,in], W [in,out].
template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(std::int64_t in, std::int64_t out, Rng& rng);
  ad::Tensor<T> operator()(const ad::Tensor<T>& x) const;
  void collect(const std::string& prefix, NamedParams<T>& out) const;

  ad::Tensor<T> weight, bias;
};

template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::int64_t in, std::int64_t out, std::int64_t kernel, std::int64_t stride, std::int64_t padding, Rng& rng);
  ad::Tensor<T> operator()(const ad::Tensor<T>& x) const;
  void collect(const std::string& prefix, NamedParams<T>& out) const;

  ad::Tensor<T> weight, bias;
  std::int64_t stride = 1, padding = 0;
};

template <typename T>
class ConvTranspose2d {
 public:
  ConvTranspose2d() = default;
  ConvTranspose2d(std::int64_t in, std::int64_t out, std::int64_t kernel, std::int64_t stride, std::int64_t padding,
                  Rng& rng);
  ad::Tensor<T> operator()(const ad::Tensor<T>& x) const;
  void collect(const std::string& prefix, NamedParams<T>& out) const;

  ad::Tensor<T> weight, bias;
  std::int64_t stride = 1, padding = 0;
};

}  // namespace pdr::nets
