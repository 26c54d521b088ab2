// Copyright 2026 The pdr Authors.
// SPDX-License-Identifier: Apache-2.0

#include "pdr/eval/disentangle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

namespace pdr::eval {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Columns with non-zero variance, centred and scaled to unit norm, so that
// Z_a^T Z_b holds Pearson coefficients.
Eigen::MatrixXd unit_columns(const Matrix& x) {
  const Eigen::Map<const RowMatrix> m(x.values.data(), x.rows, x.cols);
  std::vector<Eigen::Index> keep;
  Eigen::MatrixXd centred = m.rowwise() - m.colwise().mean();
  for (Eigen::Index j = 0; j < centred.cols(); ++j) {
    const double norm = centred.col(j).norm();
    const double scale = m.col(j).cwiseAbs().maxCoeff();
    if (norm > 1e-12 * std::max(scale, 1e-300) * std::sqrt(static_cast<double>(x.rows))) keep.push_back(j);
  }
  Eigen::MatrixXd out(centred.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const auto c = centred.col(keep[k]);
    out.col(static_cast<Eigen::Index>(k)) = c / c.norm();
  }
  return out;
}

}  // namespace

PccReport pcc_disentanglement(const std::array<Matrix, 4>& blocks) {
  const auto n = blocks[0].rows;
  if (n < 3) throw std::invalid_argument("pcc_disentanglement: needs at least 3 samples");
  for (const auto& b : blocks)
    if (b.rows != n) throw std::invalid_argument("pcc_disentanglement: blocks disagree in sample count");

  std::array<Eigen::MatrixXd, 4> z;
  for (std::size_t a = 0; a < 4; ++a) z[a] = unit_columns(blocks[a]);

  PccReport r;
  r.samples = n;
  double sum = 0.0;
  int defined = 0;
  for (std::size_t a = 0; a < 4; ++a) {
    r.matrix[a][a] = z[a].cols() > 0 ? std::optional<double>(1.0) : std::nullopt;
    for (std::size_t b = a + 1; b < 4; ++b) {
      if (z[a].cols() == 0 || z[b].cols() == 0) continue;
      const Eigen::MatrixXd corr = z[a].transpose() * z[b];
      const double v = std::min(1.0, corr.cwiseAbs().mean());
      r.matrix[a][b] = v;
      r.matrix[b][a] = v;
      sum += v;
      ++defined;
    }
  }
  if (defined > 0) r.mean_off_diagonal = sum / defined;
  return r;
}

io::Json to_json(const PccReport& r) {
  io::Json m = io::Json::array();
  for (const auto& row : r.matrix) {
    io::Json jr = io::Json::array();
    for (const auto& v : row) jr.push_back(v ? io::Json(*v) : io::Json(nullptr));
    m.push_back(jr);
  }
  return {{"task", "disentangle"},
          {"blocks", {"geom", "alb", "cam", "light"}},
          {"matrix", m},
          {"mean_off_diagonal", r.mean_off_diagonal ? io::Json(*r.mean_off_diagonal) : io::Json(nullptr)},
          {"samples", r.samples}};
}

}  // namespace pdr::eval
