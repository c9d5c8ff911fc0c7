#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "repgeo/rng.hpp"
#include "repgeo/types.hpp"

namespace repgeo {

// Average ranks, 1-based; ties receive the mean of their occupied positions.
inline std::vector<double> average_ranks(const std::vector<double>& values) {
  const std::size_t m = values.size();
  if (m == 0) throw std::invalid_argument("average_ranks: empty input");
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("average_ranks: non-finite input");
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(m);
  std::size_t i = 0;
  while (i < m) {
    std::size_t j = i;
    while (j + 1 < m && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;  // mean of positions i..j
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline std::vector<double> to_std(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

// Pearson correlation; constant input yields the undefined sentinel.
inline MaybeScalar pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
  const std::size_t m = x.size();
  if (m < 3) throw std::invalid_argument("pearson: need at least 3 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

// Spearman rank correlation: Pearson on average ranks.
inline MaybeScalar spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
  if (x.size() < 3) throw std::invalid_argument("spearman: need at least 3 points");
  return pearson(average_ranks(x), average_ranks(y));
}

inline MaybeScalar pearson(const Vector& x, const Vector& y) {
  return pearson(to_std(x), to_std(y));
}

inline MaybeScalar spearman(const Vector& x, const Vector& y) {
  return spearman(to_std(x), to_std(y));
}

// Rank-transform everything, regress the x- and y-ranks on the control ranks
// (with intercept), then correlate the residuals.
inline MaybeScalar partial_spearman(const std::vector<double>& x,
                                    const std::vector<double>& y,
                                    const std::vector<std::vector<double>>& controls) {
  if (controls.empty()) throw std::invalid_argument("partial_spearman: no controls");
  const std::size_t m = x.size();
  if (y.size() != m) throw std::invalid_argument("partial_spearman: length mismatch");
  for (const auto& c : controls)
    if (c.size() != m) throw std::invalid_argument("partial_spearman: control length mismatch");
  if (m < controls.size() + 3)
    throw std::invalid_argument("partial_spearman: too few points for the control design");

  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  // Constant controls carry no rank information beyond the intercept; drop
  // them so the partial correlation degrades to the plain Spearman.
  std::vector<std::vector<double>> control_ranks;
  for (const auto& c : controls) {
    auto rc = average_ranks(c);
    const bool constant = std::all_of(rc.begin(), rc.end(), [&](double v) { return v == rc[0]; });
    if (!constant) control_ranks.push_back(std::move(rc));
  }
  const auto p = static_cast<Eigen::Index>(control_ranks.size());
  const auto n = static_cast<Eigen::Index>(m);
  Matrix design(n, p + 1);
  design.col(0).setOnes();
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      design(i, j + 1) = control_ranks[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < p + 1)
    throw std::invalid_argument("partial_spearman: rank-deficient control design");

  Vector vx = Eigen::Map<const Vector>(rx.data(), n);
  Vector vy = Eigen::Map<const Vector>(ry.data(), n);
  Vector ex = vx - design * qr.solve(vx);
  Vector ey = vy - design * qr.solve(vy);
  // Residual correlation; near-zero residual variance means the variable is
  // explained by the controls and the partial correlation is undefined.
  const double scale = std::max(1.0, std::max(vx.norm(), vy.norm()));
  if (ex.norm() < 1e-9 * scale || ey.norm() < 1e-9 * scale) return std::nullopt;
  return pearson(ex, ey);
}

inline RngStream substream(std::uint64_t master_seed, std::uint64_t index) {
  return RngStream::substream(master_seed, index);
}

// Random orthogonal matrix via QR of a Gaussian matrix, sign-fixed so the
// implied R has positive diagonal (Haar-distributed).
inline Matrix random_orthogonal(Eigen::Index d, RngStream& stream) {
  if (d < 1) throw std::invalid_argument("random_orthogonal: d must be >= 1");
  Matrix g = stream.gaussian_matrix(d, d);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  Matrix r = q.transpose() * g;
  for (Eigen::Index j = 0; j < d; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

inline void fix_sign(Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      if (v(i) < 0.0) v = -v;
      return;
    }
  }
}

// Unit vector maximizing ||M v||; first nonzero coordinate positive.
inline Vector top_right_singular_vector(const Matrix& m) {
  if (m.rows() < 1 || m.cols() < 1) throw std::invalid_argument("top_right_singular_vector: empty matrix");
  if (m.norm() < 1e-300) throw std::invalid_argument("top_right_singular_vector: zero matrix");
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinV);
  Vector v = svd.matrixV().col(0);
  fix_sign(v);
  return v;
}

struct Scatter {
  Matrix within;   // pooled within-class scatter / n
  Matrix between;  // between-class scatter / n
  std::vector<Vector> class_means;
  Vector grand_mean;
};

inline Scatter class_scatter(const Matrix& x, const LabelVector& y) {
  const Eigen::Index n = x.rows(), d = x.cols();
  if (y.size() != n) throw std::invalid_argument("class_scatter: label/sample count mismatch");
  Scatter s;
  s.grand_mean = x.colwise().mean();
  s.within = Matrix::Zero(d, d);
  s.between = Matrix::Zero(d, d);
  const auto idx = y.class_indices();
  for (const auto& members : idx) {
    Vector mu = Vector::Zero(d);
    for (int i : members) mu += x.row(i).transpose();
    mu /= static_cast<double>(members.size());
    s.class_means.push_back(mu);
    for (int i : members) {
      Vector c = x.row(i).transpose() - mu;
      s.within += c * c.transpose();
    }
    Vector b = mu - s.grand_mean;
    s.between += static_cast<double>(members.size()) * b * b.transpose();
  }
  s.within /= static_cast<double>(n);
  s.between /= static_cast<double>(n);
  return s;
}

// Unit-normalized LDA discriminant. Binary: (S_w + lambda I)^-1 (mu1 - mu0).
// Multiclass: top generalized eigenvector of (S_w + lambda I)^-1 S_b.
// lambda = 1e-6 * trace(S_w) / d keeps singular scatter invertible.
inline Vector lda_direction(const Matrix& x, const LabelVector& y) {
  if (y.num_classes < 2) throw std::invalid_argument("lda_direction: need at least 2 classes");
  for (int c : y.class_counts())
    if (c < 2) throw std::invalid_argument("lda_direction: a class has fewer than 2 samples");
  const Eigen::Index d = x.cols();
  Scatter s = class_scatter(x, y);
  double lambda = 1e-6 * s.within.trace() / static_cast<double>(d);
  if (lambda <= 0.0) lambda = 1e-12;
  Matrix sw = s.within + lambda * Matrix::Identity(d, d);
  Vector w;
  if (y.num_classes == 2) {
    w = sw.ldlt().solve(s.class_means[1] - s.class_means[0]);
  } else {
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(s.between, sw);
    w = es.eigenvectors().col(d - 1);  // eigenvalues ascending
  }
  const double norm = w.norm();
  if (norm < 1e-300) {
    // Regularization guarantees a defined output even with identical means.
    w = Vector::Zero(d);
    w(0) = 1.0;
    return w;
  }
  w /= norm;
  fix_sign(w);
  return w;
}

}  // namespace repgeo
