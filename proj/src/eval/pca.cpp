// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pdr/eval/pca.hpp"

#include <algorithm>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/SVD>

namespace pdr::eval {

Matrix pca_project(const Matrix& x, std::int64_t components) {
  if (x.rows < 2) throw std::invalid_argument("pca_project: needs at least two samples");
  if (components < 1) throw std::invalid_argument("pca_project: components must be positive");
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMatrix> m(x.values.data(), x.rows, x.cols);
  const Eigen::MatrixXd centred = m.rowwise() - m.colwise().mean();
  const auto keep = std::min({components, x.rows - 1, x.cols});

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centred, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::MatrixXd axes = svd.matrixV().leftCols(keep);
  for (Eigen::Index c = 0; c < axes.cols(); ++c) {
    Eigen::Index arg = 0;
    axes.col(c).cwiseAbs().maxCoeff(&arg);
    if (axes(arg, c) < 0) axes.col(c) *= -1.0;
  }
  const Eigen::MatrixXd proj = centred * axes;
  Matrix out(x.rows, keep);
  for (std::int64_t i = 0; i < x.rows; ++i)
    for (std::int64_t j = 0; j < keep; ++j) out(i, j) = proj(i, j);
  return out;
}

Matrix pixel_matrix(const ad::Tensor<float>& images) {
  if (images.rank() != 4) throw std::invalid_argument("pixel_matrix: expected images [N,H,W,3]");
  const auto n = images.dim(0);
  Matrix out(n, images.numel() / n);
  const auto d = images.data();
  std::copy(d.begin(), d.end(), out.values.begin());
  return out;
}

}  // namespace pdr::eval
