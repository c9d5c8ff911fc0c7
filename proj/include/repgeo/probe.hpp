#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "repgeo/numerics.hpp"
#include "repgeo/stability.hpp"
#include "repgeo/types.hpp"

namespace repgeo {

namespace stream_tag {
inline constexpr std::uint64_t split_plan = 201;
inline constexpr std::uint64_t random_directions = 202;
inline constexpr std::uint64_t label_shuffle = 203;
}  // namespace stream_tag

struct ProbeModel {
  Matrix weights;  // C x d
  Vector bias;     // C
  int iterations = 0;
  double final_loss = 0.0;
  bool converged = false;
};

struct SteeringResult {
  double acc0 = 0.0;
  std::vector<std::pair<double, double>> acc_per_alpha;
  double max_drop = 0.0;
};

inline std::vector<double> default_alpha_grid() {
  return {-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0};
}

inline std::vector<std::uint64_t> default_seed_list() {
  return {3, 7, 9, 11, 12, 18, 103, 108, 320, 411, 724, 1754, 1991, 2222, 7258};
}

namespace detail {

// Row-wise softmax with the usual max-shift.
inline Matrix softmax_rows(const Matrix& logits) {
  Matrix p = logits;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    Vector row = p.row(i);
    const double mx = row.maxCoeff();
    row = (row.array() - mx).exp();
    p.row(i) = row / row.sum();
  }
  return p;
}

struct LogisticObjective {
  const Matrix& x;
  const LabelVector& y;
  double l2;
  int n_classes;

  // Parameters packed as [W row-major | b]. Returns loss; grad filled.
  double eval(const Vector& theta, Vector& grad) const {
    const Eigen::Index n = x.rows(), d = x.cols();
    const Eigen::Index c = n_classes;
    Eigen::Map<const Matrix> w(theta.data(), c, d);
    Eigen::Map<const Vector> b(theta.data() + c * d, c);
    Matrix logits = x * w.transpose();
    logits.rowwise() += b.transpose();
    Matrix p = softmax_rows(logits);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto yi = static_cast<Eigen::Index>(y.labels[static_cast<std::size_t>(i)]);
      loss -= std::log(std::max(p(i, yi), 1e-300));
    }
    loss += 0.5 * l2 * w.squaredNorm();
    Matrix delta = p;
    for (Eigen::Index i = 0; i < n; ++i)
      delta(i, static_cast<Eigen::Index>(y.labels[static_cast<std::size_t>(i)])) -= 1.0;
    Matrix gw = delta.transpose() * x + l2 * w;
    Vector gb = delta.colwise().sum();
    grad.resize(c * d + c);
    Eigen::Map<Matrix>(grad.data(), c, d) = gw;
    Eigen::Map<Vector>(grad.data() + c * d, c) = gb;
    return loss;
  }
};

}  // namespace detail

// Multinomial logistic regression: full-batch L-BFGS with Armijo backtracking
// from zero initialization. Deterministic; no data-dependent randomness.
inline ProbeModel train_logistic(const Matrix& x, const LabelVector& y, double l2_strength = 1.0,
                                 int max_iter = 500, double tol = 1e-6) {
  if (y.num_classes < 2) throw std::invalid_argument("train_logistic: need >= 2 classes");
  if (x.rows() < 4) throw std::invalid_argument("train_logistic: need n >= 4");
  if (y.size() != x.rows()) throw std::invalid_argument("train_logistic: label count mismatch");
  require_finite(x, "train_logistic");

  const Eigen::Index d = x.cols();
  const Eigen::Index c = y.num_classes;
  detail::LogisticObjective obj{x, y, l2_strength, y.num_classes};
  Vector theta = Vector::Zero(c * d + c);
  Vector grad;
  double loss = obj.eval(theta, grad);

  const int memory = 10;
  std::deque<Vector> s_hist, y_hist;
  std::deque<double> rho_hist;
  int iter = 0;
  bool converged = false;
  for (; iter < max_iter; ++iter) {
    if (!std::isfinite(loss)) throw std::runtime_error("train_logistic: non-finite loss");
    if (grad.lpNorm<Eigen::Infinity>() < tol) {
      converged = true;
      break;
    }
    // two-loop recursion
    Vector q = grad;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[static_cast<std::size_t>(i)] =
          rho_hist[static_cast<std::size_t>(i)] * s_hist[static_cast<std::size_t>(i)].dot(q);
      q -= alpha[static_cast<std::size_t>(i)] * y_hist[static_cast<std::size_t>(i)];
    }
    if (!s_hist.empty()) {
      const Vector& sl = s_hist.back();
      const Vector& yl = y_hist.back();
      q *= sl.dot(yl) / yl.squaredNorm();
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    Vector dir = -q;
    double slope = grad.dot(dir);
    if (slope >= 0.0) {  // fall back to steepest descent
      dir = -grad;
      slope = -grad.squaredNorm();
    }
    double step = s_hist.empty() ? 1.0 / std::max(1.0, grad.norm()) : 1.0;
    Vector theta_new;
    Vector grad_new;
    double loss_new = loss;
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      theta_new = theta + step * dir;
      loss_new = obj.eval(theta_new, grad_new);
      if (std::isfinite(loss_new) && loss_new <= loss + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    Vector s_vec = theta_new - theta;
    Vector y_vec = grad_new - grad;
    const double sy = s_vec.dot(y_vec);
    if (sy > 1e-12) {
      s_hist.push_back(std::move(s_vec));
      y_hist.push_back(std::move(y_vec));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    theta = std::move(theta_new);
    grad = std::move(grad_new);
    loss = loss_new;
  }
  if (grad.lpNorm<Eigen::Infinity>() < tol) converged = true;

  ProbeModel model;
  model.weights = Eigen::Map<const Matrix>(theta.data(), c, d);
  model.bias = Eigen::Map<const Vector>(theta.data() + c * d, c);
  model.iterations = iter;
  model.final_loss = loss;
  model.converged = converged;
  return model;
}

// Argmax prediction accuracy; ties resolve to the lower class index.
inline double accuracy(const ProbeModel& model, const Matrix& x, const LabelVector& y) {
  Matrix logits = x * model.weights.transpose();
  logits.rowwise() += model.bias.transpose();
  int correct = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < logits.cols(); ++k)
      if (logits(i, k) > logits(i, best)) best = k;
    if (static_cast<int>(best) == y.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(x.rows());
}

// Binary: normalized row difference. Multiclass: top right singular vector of W.
inline Vector steering_direction(const ProbeModel& model) {
  if (model.weights.norm() < 1e-300)
    throw std::invalid_argument("steering_direction: zero weights");
  if (model.weights.rows() == 2) {
    Vector w = model.weights.row(1) - model.weights.row(0);
    const double norm = w.norm();
    if (norm < 1e-300) throw std::invalid_argument("steering_direction: zero difference row");
    return w / norm;
  }
  return top_right_singular_vector(model.weights);
}

// Shift all test embeddings by alpha * w and re-evaluate the probe.
inline SteeringResult steering_sweep(const ProbeModel& model, const Matrix& x_test,
                                     const LabelVector& y_test, const Vector& direction,
                                     const std::vector<double>& alphas = default_alpha_grid()) {
  SteeringResult res;
  res.acc0 = accuracy(model, x_test, y_test);
  double min_acc = std::numeric_limits<double>::infinity();
  for (double a : alphas) {
    Matrix steered = x_test;
    steered.rowwise() += (a * direction).transpose();
    const double acc = accuracy(model, steered, y_test);
    res.acc_per_alpha.emplace_back(a, acc);
    min_acc = std::min(min_acc, acc);
  }
  res.max_drop = res.acc0 - min_acc;
  return res;
}

// Mean max drop over random unit directions.
inline double random_direction_control(const ProbeModel& model, const Matrix& x_test,
                                       const LabelVector& y_test, int n_dirs, RngStream stream,
                                       const std::vector<double>& alphas = default_alpha_grid()) {
  double sum = 0.0;
  for (int i = 0; i < n_dirs; ++i) {
    RngStream s = stream.child(static_cast<std::uint64_t>(i));
    Vector u = s.gaussian_vector(x_test.cols());
    u /= u.norm();
    sum += steering_sweep(model, x_test, y_test, u, alphas).max_drop;
  }
  return sum / n_dirs;
}

// Recompute the supervised stability metrics under random label permutations
// and report the mean of the defined values per metric.
inline std::map<std::string, double> shuffled_label_control(const Matrix& x, const LabelVector& y,
                                                            const StabilityConfig& cfg,
                                                            RngStream stream, int n_perms = 100) {
  std::map<std::string, double> sums;
  std::map<std::string, int> counts;
  for (int p = 0; p < n_perms; ++p) {
    RngStream s = stream.child(static_cast<std::uint64_t>(p));
    auto perm = s.permutation(y.size());
    std::vector<int> shuffled(static_cast<std::size_t>(y.size()));
    for (int i = 0; i < y.size(); ++i)
      shuffled[static_cast<std::size_t>(i)] =
          y.labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
    LabelVector yp{std::move(shuffled), y.num_classes};
    std::vector<MetricReport> reports;
    reports.push_back(shesha_sup(x, yp));
    reports.push_back(shesha_var(x, yp));
    reports.push_back(shesha_sep(x, yp, cfg));
    reports.push_back(shesha_lda(x, yp, cfg));
    reports.push_back(fisher_discriminant(x, yp));
    reports.push_back(silhouette(x, yp));
    for (const auto& r : reports) {
      if (r.value) {
        sums[r.name] += *r.value;
        ++counts[r.name];
      }
    }
  }
  std::map<std::string, double> means;
  for (const auto& [name, total] : sums) means[name] = total / counts[name];
  return means;
}

// Disjoint index sets for the split-half protocol: Set A for metrics, Set B
// split equally into probe train/test.
struct SplitPlan {
  std::uint64_t seed = 0;
  std::vector<int> set_a;
  std::vector<int> set_b_train;
  std::vector<int> set_b_test;
};

// Stratified partition: per class, a_fraction of samples to A, the rest split
// alternately between B-train and B-test.
inline SplitPlan make_split_plan(const LabelVector& y, std::uint64_t seed,
                                 double a_fraction = 0.5) {
  if (!(a_fraction > 0.0 && a_fraction < 1.0))
    throw std::invalid_argument("make_split_plan: a_fraction must be in (0, 1)");
  SplitPlan plan;
  plan.seed = seed;
  RngStream stream(seed, stream_tag::split_plan);
  for (const auto& members : y.class_indices()) {
    const int nc = static_cast<int>(members.size());
    if (nc < 4)
      throw std::invalid_argument("make_split_plan: a class has fewer than 4 samples");
    auto perm = stream.permutation(nc);
    int na = static_cast<int>(std::round(a_fraction * nc));
    na = std::min(nc - 2, std::max(2, na));
    for (int i = 0; i < nc; ++i) {
      const int idx = members[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
      if (i < na)
        plan.set_a.push_back(idx);
      else if ((i - na) % 2 == 0)
        plan.set_b_train.push_back(idx);
      else
        plan.set_b_test.push_back(idx);
    }
  }
  std::sort(plan.set_a.begin(), plan.set_a.end());
  std::sort(plan.set_b_train.begin(), plan.set_b_train.end());
  std::sort(plan.set_b_test.begin(), plan.set_b_test.end());
  return plan;
}

struct SeedRecord {
  std::uint64_t seed = 0;
  std::vector<MetricReport> metrics;  // computed on Set A only
  SteeringResult steering;            // probe trained on B-train, swept on B-test
  std::optional<double> random_direction_drop;
  std::map<std::string, double> shuffled_label_means;
};

struct SplitHalfOptions {
  double a_fraction = 0.5;
  std::vector<double> alphas = default_alpha_grid();
  bool controls = false;
  int n_random_dirs = 20;
  int n_label_perms = 100;
};

// One record per seed: Set-A metrics, Set-B steering, optional controls.
inline std::vector<SeedRecord> run_split_half(const Matrix& x, const LabelVector& y,
                                              const StabilityConfig& cfg,
                                              const std::vector<std::uint64_t>& seeds,
                                              const SplitHalfOptions& opts = {}) {
  std::vector<SeedRecord> records;
  for (std::uint64_t seed : seeds) {
    SplitPlan plan = make_split_plan(y, seed, opts.a_fraction);
    Matrix xa = detail::select_rows(x, plan.set_a);
    LabelVector ya = detail::subsample_labels(y, plan.set_a);
    Matrix xtr = detail::select_rows(x, plan.set_b_train);
    LabelVector ytr = detail::subsample_labels(y, plan.set_b_train);
    Matrix xte = detail::select_rows(x, plan.set_b_test);
    LabelVector yte = detail::subsample_labels(y, plan.set_b_test);

    SeedRecord rec;
    rec.seed = seed;
    StabilityConfig seed_cfg = cfg;
    seed_cfg.master_seed = seed;
    rec.metrics = compute_all(xa, &ya, seed_cfg);

    ProbeModel model = train_logistic(xtr, ytr);
    Vector direction = steering_direction(model);
    rec.steering = steering_sweep(model, xte, yte, direction, opts.alphas);

    if (opts.controls) {
      rec.random_direction_drop = random_direction_control(
          model, xte, yte, opts.n_random_dirs, RngStream(seed, stream_tag::random_directions),
          opts.alphas);
      rec.shuffled_label_means = shuffled_label_control(
          xa, ya, seed_cfg, RngStream(seed, stream_tag::label_shuffle), opts.n_label_perms);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace repgeo
