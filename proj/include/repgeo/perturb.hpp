#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "repgeo/drift.hpp"
#include "repgeo/probe.hpp"
#include "repgeo/rng.hpp"
#include "repgeo/types.hpp"

namespace repgeo {

enum class PerturbKind { gaussian, quantize, lowrank };

inline std::string to_string(PerturbKind k) {
  switch (k) {
    case PerturbKind::gaussian: return "gaussian";
    case PerturbKind::quantize: return "quantize";
    case PerturbKind::lowrank: return "lowrank";
  }
  return "?";
}

struct PerturbationSpec {
  PerturbKind kind = PerturbKind::gaussian;
  double sigma = 0.0;      // gaussian
  int bits = 8;            // quantize
  int rank = 1;            // lowrank
  double init_scale = 0.01;  // lowrank

  void validate() const {
    switch (kind) {
      case PerturbKind::gaussian:
        if (sigma < 0.0) throw std::invalid_argument("gaussian: sigma must be >= 0");
        break;
      case PerturbKind::quantize:
        if (bits != 4 && bits != 8) throw std::invalid_argument("quantize: bits must be 4 or 8");
        break;
      case PerturbKind::lowrank:
        if (rank < 1) throw std::invalid_argument("lowrank: rank must be >= 1");
        if (init_scale <= 0.0) throw std::invalid_argument("lowrank: init_scale must be > 0");
        break;
    }
  }

  std::string param_name() const {
    switch (kind) {
      case PerturbKind::gaussian: return "sigma";
      case PerturbKind::quantize: return "bits";
      // rank goes in the name so the single value column stays scalar
      case PerturbKind::lowrank: return "rank" + std::to_string(rank) + "_scale";
    }
    return "?";
  }

  double param_value() const {
    switch (kind) {
      case PerturbKind::gaussian: return sigma;
      case PerturbKind::quantize: return static_cast<double>(bits);
      case PerturbKind::lowrank: return init_scale;
    }
    return 0.0;
  }
};

// 51 noise levels, sigma in [0, 0.5].
inline std::vector<PerturbationSpec> gaussian_grid() {
  std::vector<PerturbationSpec> grid;
  for (int i = 0; i < 51; ++i) {
    PerturbationSpec s;
    s.kind = PerturbKind::gaussian;
    s.sigma = 0.5 * i / 50.0;
    grid.push_back(s);
  }
  return grid;
}

inline std::vector<PerturbationSpec> quantize_grid() {
  PerturbationSpec q8;
  q8.kind = PerturbKind::quantize;
  q8.bits = 8;
  PerturbationSpec q4 = q8;
  q4.bits = 4;
  return {q8, q4};
}

inline std::vector<PerturbationSpec> lowrank_grid() {
  std::vector<PerturbationSpec> grid;
  for (int r : {1, 2, 4, 8, 16, 32, 64}) {
    for (double s : {0.001, 0.005, 0.01, 0.02, 0.05, 0.1}) {
      PerturbationSpec p;
      p.kind = PerturbKind::lowrank;
      p.rank = r;
      p.init_scale = s;
      grid.push_back(p);
    }
  }
  return grid;
}

// X + sigma * G; sigma = 0 is the identity, bit-exactly.
inline Matrix perturb_gaussian(const Matrix& x, double sigma, RngStream stream) {
  if (sigma < 0.0) throw std::invalid_argument("perturb_gaussian: sigma must be >= 0");
  if (sigma == 0.0) return x;
  return x + sigma * stream.gaussian_matrix(x.rows(), x.cols());
}

// Per-tensor symmetric quantize-dequantize.
inline Matrix perturb_quantize(const Matrix& x, int bits) {
  if (bits != 4 && bits != 8) throw std::invalid_argument("perturb_quantize: bits must be 4 or 8");
  const double maxabs = x.cwiseAbs().maxCoeff();
  if (maxabs == 0.0) return x;
  const double levels = static_cast<double>((1 << (bits - 1)) - 1);
  const double scale = maxabs / levels;
  return (x / scale).array().round() * scale;
}

// X (I + A B) with A: d x r, B: r x d, entries N(0, s^2).
inline Matrix perturb_lowrank(const Matrix& x, int rank, double init_scale, RngStream stream) {
  const Eigen::Index d = x.cols();
  if (rank < 1 || rank > d) throw std::invalid_argument("perturb_lowrank: rank out of range");
  Matrix a = init_scale * stream.gaussian_matrix(d, rank);
  Matrix b = init_scale * stream.gaussian_matrix(rank, d);
  return x + (x * a) * b;
}

inline Matrix apply_perturbation(const Matrix& x, const PerturbationSpec& spec, RngStream stream) {
  spec.validate();
  switch (spec.kind) {
    case PerturbKind::gaussian: return perturb_gaussian(x, spec.sigma, stream);
    case PerturbKind::quantize: return perturb_quantize(x, spec.bits);
    case PerturbKind::lowrank: return perturb_lowrank(x, spec.rank, spec.init_scale, stream);
  }
  throw std::logic_error("unreachable");
}

// Stratified k-fold cross-validated logistic probe accuracy. Fold assignment
// depends only on the stream, never on X, so sweeps over perturbed copies of
// the same dataset reuse identical folds.
inline double kfold_accuracy(const Matrix& x, const LabelVector& y, int k, RngStream stream) {
  if (k < 2) throw std::invalid_argument("kfold_accuracy: k must be >= 2");
  for (int c : y.class_counts())
    if (c < k) throw std::invalid_argument("kfold_accuracy: a class has fewer samples than folds");
  const int n = y.size();
  std::vector<int> fold(static_cast<std::size_t>(n), 0);
  for (const auto& members : y.class_indices()) {
    auto perm = stream.permutation(static_cast<int>(members.size()));
    for (std::size_t i = 0; i < members.size(); ++i)
      fold[static_cast<std::size_t>(members[perm[i]])] = static_cast<int>(i % static_cast<std::size_t>(k));
  }
  int correct = 0;
  for (int f = 0; f < k; ++f) {
    std::vector<int> train_idx, test_idx;
    for (int i = 0; i < n; ++i)
      (fold[static_cast<std::size_t>(i)] == f ? test_idx : train_idx).push_back(i);
    ProbeModel model = train_logistic(detail::select_rows(x, train_idx),
                                      detail::subsample_labels(y, train_idx));
    Matrix xt = detail::select_rows(x, test_idx);
    LabelVector yt = detail::subsample_labels(y, test_idx);
    Matrix logits = xt * model.weights.transpose();
    logits.rowwise() += model.bias.transpose();
    for (Eigen::Index i = 0; i < xt.rows(); ++i) {
      Eigen::Index best = 0;
      for (Eigen::Index cc = 1; cc < logits.cols(); ++cc)
        if (logits(i, cc) > logits(i, best)) best = cc;
      if (static_cast<int>(best) == yt.labels[static_cast<std::size_t>(i)]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

struct SweepRecord {
  PerturbationSpec spec;
  DriftReport drift;
  double baseline_accuracy = 0.0;
  double accuracy = 0.0;
  double accuracy_drop = 0.0;
  std::string error;  // empty on success
};

// Full canary sweep: one record per grid point, pairing drift against the
// unperturbed snapshot with cross-validated probe accuracy. Grid points get
// pre-assigned substreams, so `jobs` changes runtime only.
inline std::vector<SweepRecord> run_canary(const Matrix& x, const LabelVector& y,
                                           const std::vector<PerturbationSpec>& grid,
                                           RngStream stream, int n_projections = 100,
                                           int cv_folds = 5, int jobs = 1) {
  RngStream fold_stream = stream.child(0);
  const double baseline = kfold_accuracy(x, y, cv_folds, fold_stream);
  std::vector<SweepRecord> records(grid.size());
  auto work = [&](std::size_t i) {
    SweepRecord& rec = records[i];
    rec.spec = grid[i];
    rec.baseline_accuracy = baseline;
    try {
      RngStream s = stream.child(i + 1);
      Matrix xp = apply_perturbation(x, grid[i], s.child(0));
      rec.drift = drift_report(x, xp, s.child(1), n_projections);
      rec.accuracy = kfold_accuracy(xp, y, cv_folds, fold_stream);
      rec.accuracy_drop = baseline - rec.accuracy;
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
  };
  if (jobs <= 1) {
    for (std::size_t i = 0; i < grid.size(); ++i) work(i);
  } else {
    std::vector<std::thread> pool;
    std::size_t stride = static_cast<std::size_t>(jobs);
    for (std::size_t t = 0; t < stride; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t i = t; i < grid.size(); i += stride) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }
  return records;
}

}  // namespace repgeo
