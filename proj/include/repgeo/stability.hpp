#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "repgeo/drift.hpp"
#include "repgeo/numerics.hpp"
#include "repgeo/rdm.hpp"
#include "repgeo/rng.hpp"
#include "repgeo/types.hpp"

namespace repgeo {

struct StabilityConfig {
  int n_splits = 30;
  int n_bootstrap = 50;
  double subsample_fraction = 0.5;
  std::uint64_t master_seed = 3;

  void validate() const {
    if (n_splits < 1) throw std::invalid_argument("StabilityConfig: n_splits must be >= 1");
    if (n_bootstrap < 1) throw std::invalid_argument("StabilityConfig: n_bootstrap must be >= 1");
    if (!(subsample_fraction > 0.0 && subsample_fraction < 1.0))
      throw std::invalid_argument("StabilityConfig: subsample_fraction must be in (0, 1)");
  }
};

// Distinct stream indices per operation so no two metrics ever share draws.
namespace stream_tag {
inline constexpr std::uint64_t shesha_fs = 101;
inline constexpr std::uint64_t shesha_sep = 102;
inline constexpr std::uint64_t shesha_lda = 103;
inline constexpr std::uint64_t procrustes_stability = 104;
}  // namespace stream_tag

namespace detail {

inline Matrix select_columns(const Matrix& x, const std::vector<int>& cols) {
  Matrix out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = x.col(cols[j]);
  return out;
}

inline Matrix select_rows(const Matrix& x, const std::vector<int>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  return out;
}

// Per-class subsample of ceil(fraction * n_c) samples, at least 2, without
// replacement. Guarantees every class stays present.
inline std::vector<int> stratified_subsample(const LabelVector& y, double fraction,
                                             RngStream& stream) {
  std::vector<int> picked;
  for (const auto& members : y.class_indices()) {
    const int nc = static_cast<int>(members.size());
    int take = static_cast<int>(std::ceil(fraction * nc));
    take = std::min(nc, std::max(2, take));
    auto idx = stream.sample_without_replacement(nc, take);
    for (int i : idx) picked.push_back(members[static_cast<std::size_t>(i)]);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

inline LabelVector subsample_labels(const LabelVector& y, const std::vector<int>& rows) {
  std::vector<int> sub;
  sub.reserve(rows.size());
  for (int i : rows) sub.push_back(y.labels[static_cast<std::size_t>(i)]);
  return LabelVector{std::move(sub), y.num_classes};
}

// Random disjoint dimension split; odd d puts the extra dimension in view 1.
inline std::pair<std::vector<int>, std::vector<int>> split_dimensions(Eigen::Index d,
                                                                     RngStream& stream) {
  auto perm = stream.permutation(static_cast<int>(d));
  const auto half = static_cast<std::size_t>((d + 1) / 2);
  std::vector<int> v1(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(half));
  std::vector<int> v2(perm.begin() + static_cast<std::ptrdiff_t>(half), perm.end());
  return {std::move(v1), std::move(v2)};
}

// Projection of x onto its top m principal components.
inline Matrix pca_project(const Matrix& x, Eigen::Index m) {
  Matrix centered = x.rowwise() - x.colwise().mean();
  Matrix cov = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  const Eigen::Index d = x.cols();
  return centered * es.eigenvectors().rightCols(std::min(m, d));
}

}  // namespace detail

// Feature-split stability: mean over K random disjoint dimension splits of the
// Spearman correlation between the two half-view RDMs.
inline MetricReport shesha_fs(const Matrix& x, const StabilityConfig& cfg) {
  cfg.validate();
  if (x.cols() < 2) throw std::invalid_argument("shesha_fs: need d >= 2");
  if (x.rows() < 3) throw std::invalid_argument("shesha_fs: need n >= 3");
  RngStream base(cfg.master_seed, stream_tag::shesha_fs);
  double sum = 0.0;
  int used = 0, skipped = 0;
  for (int k = 0; k < cfg.n_splits; ++k) {
    RngStream s = base.child(static_cast<std::uint64_t>(k));
    auto [v1, v2] = detail::split_dimensions(x.cols(), s);
    try {
      auto rho = spearman(condense(cosine_rdm(detail::select_columns(x, v1))),
                          condense(cosine_rdm(detail::select_columns(x, v2))));
      if (!rho) {
        ++skipped;
        continue;
      }
      sum += *rho;
      ++used;
    } catch (const std::invalid_argument&) {
      ++skipped;
    }
  }
  MetricReport r;
  r.name = "shesha_fs";
  r.seed = static_cast<std::int64_t>(cfg.master_seed);
  r.params = {{"n_splits", static_cast<double>(cfg.n_splits)},
              {"skipped", static_cast<double>(skipped)}};
  if (used == 0) {
    r.note = "all splits degenerate";
    return r;
  }
  r.value = sum / used;
  return r;
}

// Supervised RDM alignment: Spearman between the cosine RDM and the
// label-derived ideal RDM.
inline MetricReport shesha_sup(const Matrix& x, const LabelVector& y) {
  if (x.rows() < 3) throw std::invalid_argument("shesha_sup: need n >= 3");
  if (y.num_classes < 2) throw std::invalid_argument("shesha_sup: need >= 2 classes");
  MetricReport r;
  r.name = "shesha_sup";
  auto rho = spearman(condense(cosine_rdm(x)), condense(label_rdm(y)));
  if (rho)
    r.value = *rho;
  else
    r.note = "constant RDM";
  return r;
}

// Between-class share of total variance, in [0, 1].
inline MetricReport shesha_var(const Matrix& x, const LabelVector& y) {
  if (x.rows() < 2) throw std::invalid_argument("shesha_var: need n >= 2");
  const Eigen::Index n = x.rows();
  Vector mu = x.colwise().mean();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) total += (x.row(i).transpose() - mu).squaredNorm();
  MetricReport r;
  r.name = "shesha_var";
  if (total <= 0.0) {
    r.note = "zero total variance";
    return r;
  }
  double between = 0.0;
  for (const auto& members : y.class_indices()) {
    if (members.empty()) continue;
    Vector mc = Vector::Zero(x.cols());
    for (int i : members) mc += x.row(i).transpose();
    mc /= static_cast<double>(members.size());
    between += static_cast<double>(members.size()) * (mc - mu).squaredNorm();
  }
  r.value = between / total;
  return r;
}

// Bootstrapped between/within mean cosine distance ratio.
inline MetricReport shesha_sep(const Matrix& x, const LabelVector& y,
                               const StabilityConfig& cfg) {
  cfg.validate();
  if (y.num_classes < 2) throw std::invalid_argument("shesha_sep: need >= 2 classes");
  for (int c : y.class_counts())
    if (c < 2) throw std::invalid_argument("shesha_sep: a class has fewer than 2 samples");
  RngStream base(cfg.master_seed, stream_tag::shesha_sep);
  Matrix d = cosine_rdm(x);
  double sum = 0.0;
  int used = 0, skipped = 0;
  for (int b = 0; b < cfg.n_bootstrap; ++b) {
    RngStream s = base.child(static_cast<std::uint64_t>(b));
    auto rows = detail::stratified_subsample(y, cfg.subsample_fraction, s);
    double between = 0.0, within = 0.0;
    std::int64_t n_between = 0, n_within = 0;
    for (std::size_t a = 0; a < rows.size(); ++a) {
      for (std::size_t c = a + 1; c < rows.size(); ++c) {
        const int i = rows[a], j = rows[c];
        const double dij = d(i, j);
        if (y.labels[static_cast<std::size_t>(i)] == y.labels[static_cast<std::size_t>(j)]) {
          within += dij;
          ++n_within;
        } else {
          between += dij;
          ++n_between;
        }
      }
    }
    if (n_within == 0 || n_between == 0 || within <= 0.0) {
      ++skipped;
      continue;
    }
    sum += (between / n_between) / (within / n_within);
    ++used;
  }
  MetricReport r;
  r.name = "shesha_sep";
  r.seed = static_cast<std::int64_t>(cfg.master_seed);
  r.params = {{"n_bootstrap", static_cast<double>(cfg.n_bootstrap)},
              {"skipped", static_cast<double>(skipped)},
              {"subsample_fraction", cfg.subsample_fraction}};
  if (used == 0) {
    r.note = "all bootstraps degenerate";
    return r;
  }
  r.value = sum / used;
  return r;
}

// Mean |w^T w_b| between the full-data LDA direction and bootstrap refits.
inline MetricReport shesha_lda(const Matrix& x, const LabelVector& y,
                               const StabilityConfig& cfg) {
  cfg.validate();
  Vector w = lda_direction(x, y);
  RngStream base(cfg.master_seed, stream_tag::shesha_lda);
  double sum = 0.0;
  int used = 0, skipped = 0;
  for (int b = 0; b < cfg.n_bootstrap; ++b) {
    RngStream s = base.child(static_cast<std::uint64_t>(b));
    bool done = false;
    for (int attempt = 0; attempt < 5 && !done; ++attempt) {
      auto rows = detail::stratified_subsample(y, cfg.subsample_fraction, s);
      try {
        Vector wb = lda_direction(detail::select_rows(x, rows), detail::subsample_labels(y, rows));
        sum += std::abs(w.dot(wb));
        ++used;
        done = true;
      } catch (const std::invalid_argument&) {
        // class collapse in the subsample; redraw
      }
    }
    if (!done) ++skipped;
  }
  MetricReport r;
  r.name = "shesha_lda";
  r.seed = static_cast<std::int64_t>(cfg.master_seed);
  r.params = {{"n_bootstrap", static_cast<double>(cfg.n_bootstrap)},
              {"skipped", static_cast<double>(skipped)},
              {"subsample_fraction", cfg.subsample_fraction}};
  if (used == 0) {
    r.note = "all bootstraps degenerate";
    return r;
  }
  r.value = sum / used;
  return r;
}

// trace(S_b) / trace(S_w).
inline MetricReport fisher_discriminant(const Matrix& x, const LabelVector& y) {
  if (y.num_classes < 2) throw std::invalid_argument("fisher_discriminant: need >= 2 classes");
  Scatter s = class_scatter(x, y);
  MetricReport r;
  r.name = "fisher_discriminant";
  const double tw = s.within.trace();
  if (tw <= 0.0) {
    r.note = "zero within-class variance";
    return r;
  }
  r.value = s.between.trace() / tw;
  return r;
}

// Mean silhouette with cosine distances; singleton-class samples score 0.
inline MetricReport silhouette(const Matrix& x, const LabelVector& y) {
  if (y.num_classes < 2) throw std::invalid_argument("silhouette: need >= 2 classes");
  const Eigen::Index n = x.rows();
  Matrix d = cosine_rdm(x);
  const auto counts = y.class_counts();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int ci = y.labels[static_cast<std::size_t>(i)];
    if (counts[static_cast<std::size_t>(ci)] < 2) continue;  // contributes 0
    std::vector<double> sums(static_cast<std::size_t>(y.num_classes), 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      sums[static_cast<std::size_t>(y.labels[static_cast<std::size_t>(j)])] += d(i, j);
    }
    const double a = sums[static_cast<std::size_t>(ci)] /
                     static_cast<double>(counts[static_cast<std::size_t>(ci)] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < y.num_classes; ++c) {
      if (c == ci || counts[static_cast<std::size_t>(c)] == 0) continue;
      b = std::min(b, sums[static_cast<std::size_t>(c)] /
                          static_cast<double>(counts[static_cast<std::size_t>(c)]));
    }
    const double m = std::max(a, b);
    total += m > 0.0 ? (b - a) / m : 0.0;
  }
  MetricReport r;
  r.name = "silhouette";
  r.value = total / static_cast<double>(n);
  return r;
}

// Share of total variance carried by the leading principal direction.
inline MetricReport anisotropy(const Matrix& x) {
  if (x.rows() < 2) throw std::invalid_argument("anisotropy: need n >= 2");
  Matrix centered = x.rowwise() - x.colwise().mean();
  Matrix cov = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
  MetricReport r;
  r.name = "anisotropy";
  const double tr = cov.trace();
  if (tr <= 0.0) {
    r.note = "zero covariance";
    return r;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  r.value = es.eigenvalues()(cov.rows() - 1) / tr;
  return r;
}

// Split-half Procrustes stability: per split, project each dimension half onto
// its top principal components and measure Procrustes similarity of the views.
inline MetricReport procrustes_stability(const Matrix& x, const StabilityConfig& cfg) {
  cfg.validate();
  if (x.cols() < 4) throw std::invalid_argument("procrustes_stability: need d >= 4");
  if (x.rows() < 3) throw std::invalid_argument("procrustes_stability: need n >= 3");
  RngStream base(cfg.master_seed, stream_tag::procrustes_stability);
  const Eigen::Index m =
      std::min<Eigen::Index>({x.cols() / 2, x.rows() - 1, Eigen::Index{32}});
  double sum = 0.0;
  int used = 0, skipped = 0;
  for (int k = 0; k < cfg.n_splits; ++k) {
    RngStream s = base.child(static_cast<std::uint64_t>(k));
    auto [v1, v2] = detail::split_dimensions(x.cols(), s);
    try {
      Matrix p1 = detail::pca_project(detail::select_columns(x, v1), m);
      Matrix p2 = detail::pca_project(detail::select_columns(x, v2), m);
      sum += procrustes_similarity(p1, p2);
      ++used;
    } catch (const std::invalid_argument&) {
      ++skipped;
    }
  }
  MetricReport r;
  r.name = "procrustes_stability";
  r.seed = static_cast<std::int64_t>(cfg.master_seed);
  r.params = {{"n_splits", static_cast<double>(cfg.n_splits)},
              {"n_components", static_cast<double>(m)},
              {"skipped", static_cast<double>(skipped)}};
  if (used == 0) {
    r.note = "all splits degenerate";
    return r;
  }
  r.value = sum / used;
  return r;
}

// All metrics in a fixed order; supervised ones only when labels are present.
// Per-metric failures are collected as undefined reports, not propagated.
inline std::vector<MetricReport> compute_all(const Matrix& x, const LabelVector* y,
                                             const StabilityConfig& cfg) {
  std::vector<MetricReport> out;
  auto run = [&](const std::string& name, auto&& f) {
    try {
      out.push_back(f());
    } catch (const std::exception& e) {
      MetricReport r;
      r.name = name;
      r.seed = static_cast<std::int64_t>(cfg.master_seed);
      r.note = e.what();
      out.push_back(std::move(r));
    }
  };
  run("shesha_fs", [&] { return shesha_fs(x, cfg); });
  if (y != nullptr) {
    run("shesha_sup", [&] { return shesha_sup(x, *y); });
    run("shesha_var", [&] { return shesha_var(x, *y); });
    run("shesha_sep", [&] { return shesha_sep(x, *y, cfg); });
    run("shesha_lda", [&] { return shesha_lda(x, *y, cfg); });
    run("fisher_discriminant", [&] { return fisher_discriminant(x, *y); });
    run("silhouette", [&] { return silhouette(x, *y); });
  }
  run("anisotropy", [&] { return anisotropy(x); });
  run("procrustes_stability", [&] { return procrustes_stability(x, cfg); });
  for (auto& r : out) r.seed = static_cast<std::int64_t>(cfg.master_seed);
  return out;
}

}  // namespace repgeo
