#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

#include "repgeo/types.hpp"

namespace repgeo {

// n x n cosine-distance RDM: D[i,j] = 1 - cos(x_i, x_j), zero diagonal.
// Rows with near-zero norm are a hard error; clamping would scramble the
// rank structure downstream.
inline Matrix cosine_rdm(const Matrix& x) {
  const Eigen::Index n = x.rows();
  if (n < 2) throw std::invalid_argument("cosine_rdm: need at least 2 rows");
  require_finite(x, "cosine_rdm");
  Vector norms = x.rowwise().norm();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (norms(i) < 1e-12)
      throw std::invalid_argument("cosine_rdm: row " + std::to_string(i) + " has near-zero norm");
  }
  Matrix unit = x.array().colwise() / norms.array();
  Matrix d = Matrix::Ones(n, n) - unit * unit.transpose();
  d = 0.5 * (d + d.transpose());  // exact symmetry
  d.diagonal().setZero();
  return d;
}

// Label-derived ideal RDM: Hamming distance between one-hot encodings,
// 0 for same class and 2 otherwise.
inline Matrix label_rdm(const LabelVector& y) {
  const auto n = static_cast<Eigen::Index>(y.labels.size());
  Matrix d = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (y.labels[static_cast<std::size_t>(i)] != y.labels[static_cast<std::size_t>(j)])
        d(i, j) = d(j, i) = 2.0;
  return d;
}

// Strict upper triangle, row-major i < j.
inline Vector condense(const Matrix& d) {
  const Eigen::Index n = d.rows();
  Vector v(n * (n - 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) v(k++) = d(i, j);
  return v;
}

}  // namespace repgeo
