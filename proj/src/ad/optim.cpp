// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pdr/ad/optim.hpp"

#include <cmath>

namespace pdr::ad {

template <typename T>
Adam<T>::Adam(std::vector<Tensor<T>> params, AdamOptions options)
    : params_(std::move(params)), options_(options) {
  for (const auto& p : params_) {
    m_.emplace_back(static_cast<size_t>(p.numel()), T(0));
    v_.emplace_back(static_cast<size_t>(p.numel()), T(0));
  }
}

template <typename T>
void Adam<T>::step() {
  ++steps_;
  const double t = static_cast<double>(steps_);
  const T lr = static_cast<T>(options_.lr);
  const T b1 = static_cast<T>(options_.beta1);
  const T b2 = static_cast<T>(options_.beta2);
  const T eps = static_cast<T>(options_.eps);
  const T c1 = static_cast<T>(1.0 - std::pow(options_.beta1, t));
  const T c2 = static_cast<T>(1.0 - std::pow(options_.beta2, t));
  for (size_t k = 0; k < params_.size(); ++k) {
    auto& p = params_[k];
    if (!p.has_grad()) continue;
    auto w = p.mutable_data();
    auto g = p.mutable_grad();
    auto& m = m_[k];
    auto& v = v_[k];
    for (size_t i = 0; i < w.size(); ++i) {
      m[i] = b1 * m[i] + (T(1) - b1) * g[i];
      v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
      const T mhat = m[i] / c1;
      const T vhat = v[i] / c2;
      w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
    p.zero_grad();
  }
}

template <typename T>
void Adam<T>::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

template class Adam<float>;
template class Adam<double>;

}  // namespace pdr::ad
