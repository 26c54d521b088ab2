// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pdr/nets/layers.hpp"

#include <cmath>

#include "pdr/ad/ops.hpp"

namespace pdr::nets {

template <typename T>
ad::Tensor<T> uniform_fan_in(ad::Shape shape, double fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(fan_in);
  std::vector<T> values(static_cast<size_t>(ad::numel(shape)));
  for (auto& v : values) v = static_cast<T>(rng.uniform(-bound, bound));
  auto t = ad::Tensor<T>::from(std::move(shape), std::move(values));
  t.set_requires_grad(true);
  return t;
}

template <typename T>
Linear<T>::Linear(std::int64_t in, std::int64_t out, Rng& rng)
    : weight(uniform_fan_in<T>({in, out}, static_cast<double>(in), rng)),
      bias(uniform_fan_in<T>({out}, static_cast<double>(in), rng)) {}

template <typename T>
ad::Tensor<T> Linear<T>::operator()(const ad::Tensor<T>& x) const {
  return ad::matmul(x, weight) + bias;
}

template <typename T>
void Linear<T>::collect(const std::string& prefix, NamedParams<T>& out) const {
  out.emplace_back(prefix + ".weight", weight);
  out.emplace_back(prefix + ".bias", bias);
}

template <typename T>
Conv2d<T>::Conv2d(std::int64_t in, std::int64_t out, std::int64_t kernel, std::int64_t stride_, std::int64_t padding_,
                  Rng& rng)
    : weight(uniform_fan_in<T>({out, in, kernel, kernel}, static_cast<double>(in * kernel * kernel), rng)),
      bias(uniform_fan_in<T>({out}, static_cast<double>(in * kernel * kernel), rng)),
      stride(stride_),
      padding(padding_) {}

template <typename T>
ad::Tensor<T> Conv2d<T>::operator()(const ad::Tensor<T>& x) const {
  return ad::conv2d(x, weight, bias, stride, padding);
}

template <typename T>
void Conv2d<T>::collect(const std::string& prefix, NamedParams<T>& out) const {
  out.emplace_back(prefix + ".weight", weight);
  out.emplace_back(prefix + ".bias", bias);
}

// Each output pixel of a strided transposed convolution sees in * (k/s)^2 inputs.
template <typename T>
ConvTranspose2d<T>::ConvTranspose2d(std::int64_t in, std::int64_t out, std::int64_t kernel, std::int64_t stride_,
                                    std::int64_t padding_, Rng& rng)
    : weight(uniform_fan_in<T>({in, out, kernel, kernel},
                               static_cast<double>(in * kernel * kernel) / static_cast<double>(stride_ * stride_), rng)),
      bias(uniform_fan_in<T>({out}, static_cast<double>(in * kernel * kernel) / static_cast<double>(stride_ * stride_),
                             rng)),
      stride(stride_),
      padding(padding_) {}

template <typename T>
ad::Tensor<T> ConvTranspose2d<T>::operator()(const ad::Tensor<T>& x) const {
  return ad::conv_transpose2d(x, weight, bias, stride, padding);
}

template <typename T>
void ConvTranspose2d<T>::collect(const std::string& prefix, NamedParams<T>& out) const {
  out.emplace_back(prefix + ".weight", weight);
  out.emplace_back(prefix + ".bias", bias);
}

template ad::Tensor<float> uniform_fan_in(ad::Shape, double, Rng&);
template ad::Tensor<double> uniform_fan_in(ad::Shape, double, Rng&);
template class Linear<float>;
template class Linear<double>;
template class Conv2d<float>;
template class Conv2d<double>;
template class ConvTranspose2d<float>;
template class ConvTranspose2d<double>;

}  // namespace pdr::nets
