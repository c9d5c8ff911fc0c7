#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "repgeo/numerics.hpp"
#include "repgeo/rdm.hpp"
#include "repgeo/rng.hpp"
#include "repgeo/types.hpp"

namespace repgeo {

inline void check_paired(const Matrix& a, const Matrix& b, Eigen::Index min_n) {
  if (a.rows() != b.rows())
    throw std::invalid_argument("drift: snapshots have different sample counts (" +
                                std::to_string(a.rows()) + " vs " + std::to_string(b.rows()) + ")");
  if (a.rows() < min_n)
    throw std::invalid_argument("drift: need at least " + std::to_string(min_n) + " samples");
}

// 1 - Spearman correlation of the two cosine RDMs.
inline MaybeScalar shesha_drift(const Matrix& a, const Matrix& b) {
  check_paired(a, b, 3);
  auto rho = spearman(condense(cosine_rdm(a)), condense(cosine_rdm(b)));
  if (!rho) return std::nullopt;
  return 1.0 - *rho;
}

// 1 - Pearson correlation of the two cosine RDMs.
inline MaybeScalar rdm_pearson_drift(const Matrix& a, const Matrix& b) {
  check_paired(a, b, 3);
  auto r = pearson(condense(cosine_rdm(a)), condense(cosine_rdm(b)));
  if (!r) return std::nullopt;
  return 1.0 - *r;
}

// Unbiased HSIC estimator on Gram matrices with zeroed diagonals.
inline double hsic_unbiased(const Matrix& k, const Matrix& l) {
  const Eigen::Index n = k.rows();
  Matrix kt = k, lt = l;
  kt.diagonal().setZero();
  lt.diagonal().setZero();
  const double nn = static_cast<double>(n);
  const double term1 = (kt.array() * lt.array()).sum();
  const double term2 = kt.sum() * lt.sum() / ((nn - 1.0) * (nn - 2.0));
  const double term3 = 2.0 / (nn - 2.0) * (kt * lt).sum();
  return (term1 + term2 - term3) / (nn * (nn - 3.0));
}

// 1 - debiased linear CKA.
inline MaybeScalar cka_drift(const Matrix& a, const Matrix& b) {
  check_paired(a, b, 4);
  Matrix k = a * a.transpose();
  Matrix l = b * b.transpose();
  const double cross = hsic_unbiased(k, l);
  const double self_k = hsic_unbiased(k, k);
  const double self_l = hsic_unbiased(l, l);
  if (self_k <= 0.0 || self_l <= 0.0) return std::nullopt;
  return 1.0 - cross / std::sqrt(self_k * self_l);
}

// Procrustes similarity after centering and Frobenius normalization:
// the nuclear norm of A~^T B~, in [0, 1].
inline double procrustes_similarity(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("procrustes: shape mismatch");
  if (a.rows() < 2) throw std::invalid_argument("procrustes: need at least 2 rows");
  Matrix ca = a.rowwise() - a.colwise().mean();
  Matrix cb = b.rowwise() - b.colwise().mean();
  const double na = ca.norm(), nb = cb.norm();
  if (na < 1e-300 || nb < 1e-300)
    throw std::invalid_argument("procrustes: zero matrix after centering");
  Matrix cross = (ca / na).transpose() * (cb / nb);
  Eigen::JacobiSVD<Matrix> svd(cross);
  return svd.singularValues().sum();
}

inline MaybeScalar procrustes_drift(const Matrix& a, const Matrix& b) {
  return 1.0 - procrustes_similarity(a, b);
}

// Mean over random unit projections of the 1-D Wasserstein-1 distance
// between the projected point sets (equal counts: sorted absolute gap).
inline double sliced_wasserstein(const Matrix& a, const Matrix& b, int n_projections,
                                 RngStream stream) {
  check_paired(a, b, 1);
  if (a.cols() != b.cols())
    throw std::invalid_argument("sliced_wasserstein: feature dimensions differ");
  if (n_projections < 1) throw std::invalid_argument("sliced_wasserstein: need >= 1 projection");
  const Eigen::Index n = a.rows();
  double total = 0.0;
  for (int p = 0; p < n_projections; ++p) {
    RngStream ps = stream.child(static_cast<std::uint64_t>(p));
    Vector u = ps.gaussian_vector(a.cols());
    u /= u.norm();
    Vector ua = a * u;
    Vector ub = b * u;
    std::vector<double> pa = to_std(ua), pb = to_std(ub);
    std::sort(pa.begin(), pa.end());
    std::sort(pb.begin(), pb.end());
    double w1 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      w1 += std::abs(pa[static_cast<std::size_t>(i)] - pb[static_cast<std::size_t>(i)]);
    total += w1 / static_cast<double>(n);
  }
  return total / static_cast<double>(n_projections);
}

struct DriftReport {
  MaybeScalar shesha;
  MaybeScalar rdm_pearson;
  MaybeScalar cka;
  MaybeScalar procrustes;
  MaybeScalar swd;

  std::vector<std::pair<std::string, MaybeScalar>> entries() const {
    return {{"shesha", shesha},
            {"rdm_pearson", rdm_pearson},
            {"cka", cka},
            {"procrustes", procrustes},
            {"swd", swd}};
  }
};

// All five drift metrics; per-metric failures become undefined entries.
inline DriftReport drift_report(const Matrix& a, const Matrix& b, RngStream stream,
                                int n_projections = 100) {
  DriftReport r;
  auto guard = [](auto&& f) -> MaybeScalar {
    try {
      return f();
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };
  r.shesha = guard([&] { return shesha_drift(a, b); });
  r.rdm_pearson = guard([&] { return rdm_pearson_drift(a, b); });
  r.cka = guard([&] { return cka_drift(a, b); });
  r.procrustes = guard([&] { return procrustes_drift(a, b); });
  r.swd = guard([&] { return MaybeScalar(sliced_wasserstein(a, b, n_projections, stream)); });
  return r;
}

}  // namespace repgeo
