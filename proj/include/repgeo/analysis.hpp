#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "repgeo/numerics.hpp"
#include "repgeo/perturb.hpp"
#include "repgeo/rng.hpp"
#include "repgeo/types.hpp"

namespace repgeo {

namespace stream_tag {
inline constexpr std::uint64_t permutation_test = 301;
}

// Drift series for one model over a perturbation-magnitude grid.
struct ModelSeries {
  std::string model_id;
  std::vector<double> magnitudes;  // strictly increasing
  std::map<std::string, std::vector<double>> drift;  // metric -> series
  std::vector<double> accuracy_drop;

  void validate() const {
    if (magnitudes.size() < 1) throw std::invalid_argument("ModelSeries: empty grid");
    for (std::size_t i = 1; i < magnitudes.size(); ++i)
      if (magnitudes[i] <= magnitudes[i - 1])
        throw std::invalid_argument("ModelSeries: magnitudes must be strictly increasing");
    for (const auto& [name, series] : drift)
      if (series.size() != magnitudes.size())
        throw std::invalid_argument("ModelSeries: series length mismatch for " + name);
  }
};

// Smallest magnitude at which drift reaches the threshold; equality counts.
inline std::optional<double> detection_threshold(const ModelSeries& series,
                                                 const std::string& metric,
                                                 double threshold = 0.05) {
  series.validate();
  auto it = series.drift.find(metric);
  if (it == series.drift.end())
    throw std::invalid_argument("detection_threshold: unknown metric " + metric);
  for (std::size_t i = 0; i < it->second.size(); ++i)
    if (it->second[i] >= threshold) return series.magnitudes[i];
  return std::nullopt;  // never
}

struct EarlyWarningCounts {
  int a_first = 0;
  int b_first = 0;
  int tie = 0;
  int never = 0;
};

inline EarlyWarningCounts early_warning_compare(const std::vector<ModelSeries>& models,
                                                const std::string& metric_a,
                                                const std::string& metric_b,
                                                double threshold = 0.05) {
  if (models.empty()) throw std::invalid_argument("early_warning_compare: no models");
  EarlyWarningCounts c;
  for (const auto& m : models) {
    auto da = detection_threshold(m, metric_a, threshold);
    auto db = detection_threshold(m, metric_b, threshold);
    if (!da && !db)
      ++c.never;
    else if (!db || (da && *da < *db))
      ++c.a_first;
    else if (!da || *db < *da)
      ++c.b_first;
    else
      ++c.tie;
  }
  return c;
}

// Fraction of stable-regime records (accuracy drop below the stable threshold)
// where the metric's drift crossed the alarm threshold.
inline MaybeScalar false_alarm_rate(const std::vector<SweepRecord>& records,
                                    const std::string& metric, double drift_threshold = 0.05,
                                    double stable_accuracy_drop = 0.01) {
  int stable = 0, alarms = 0;
  for (const auto& rec : records) {
    if (!rec.error.empty()) continue;
    if (rec.accuracy_drop >= stable_accuracy_drop) continue;
    MaybeScalar value;
    for (const auto& [name, v] : rec.drift.entries())
      if (name == metric) value = v;
    if (!value) continue;
    ++stable;
    if (*value >= drift_threshold) ++alarms;
  }
  if (stable == 0) return std::nullopt;
  return static_cast<double>(alarms) / stable;
}

struct RocResult {
  double auc = 0.0;
  double sensitivity_at_fpr05 = 0.0;
};

// Mann-Whitney pair-counting AUC (ties 0.5) plus sensitivity at the largest
// threshold whose false positive rate does not exceed 5%.
inline RocResult roc_auc(const std::vector<double>& scores, const std::vector<bool>& positives) {
  if (scores.size() != positives.size()) throw std::invalid_argument("roc_auc: length mismatch");
  std::int64_t n_pos = 0, n_neg = 0;
  for (bool p : positives) (p ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("roc_auc: need both classes");
  double wins = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!positives[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (positives[j]) continue;
      if (scores[i] > scores[j])
        wins += 1.0;
      else if (scores[i] == scores[j])
        wins += 0.5;
    }
  }
  RocResult res;
  res.auc = wins / (static_cast<double>(n_pos) * static_cast<double>(n_neg));

  // threshold sweep: alarm when score >= t
  std::vector<double> thresholds = scores;
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  double best_tpr = 0.0;
  for (double t : thresholds) {
    std::int64_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= t) (positives[i] ? tp : fp)++;
    }
    if (static_cast<double>(fp) / n_neg <= 0.05)
      best_tpr = std::max(best_tpr, static_cast<double>(tp) / n_pos);
  }
  res.sensitivity_at_fpr05 = best_tpr;
  return res;
}

struct CorrelationRow {
  std::string metric;
  MaybeScalar raw_rho;
  MaybeScalar p_value;
  MaybeScalar partial_rho;
};

struct CorrelationTable {
  std::vector<CorrelationRow> rows;
};

// Permutation p-value for |spearman| with substreamed shuffles.
inline MaybeScalar permutation_p_value(const std::vector<double>& x, const std::vector<double>& y,
                                       RngStream stream, int n_perms = 10000) {
  auto obs = spearman(x, y);
  if (!obs) return std::nullopt;
  int hits = 0;
  std::vector<double> shuffled = y;
  for (int p = 0; p < n_perms; ++p) {
    RngStream s = stream.child(static_cast<std::uint64_t>(p));
    auto perm = s.permutation(static_cast<int>(y.size()));
    for (std::size_t i = 0; i < y.size(); ++i) shuffled[i] = y[perm[i]];
    auto rho = spearman(x, shuffled);
    if (rho && std::abs(*rho) >= std::abs(*obs) - 1e-15) ++hits;
  }
  return static_cast<double>(hits + 1) / (n_perms + 1);
}

// Per metric: raw Spearman against max drop, permutation p-value, and partial
// Spearman controlling for the named control metrics.
inline CorrelationTable correlation_table(
    const std::map<std::string, std::vector<double>>& metric_values,
    const std::vector<double>& max_drop,
    const std::map<std::string, std::vector<double>>& controls, RngStream stream,
    int n_perms = 10000) {
  if (max_drop.size() < 5) throw std::invalid_argument("correlation_table: need >= 5 models");
  std::vector<std::vector<double>> control_vecs;
  for (const auto& [name, v] : controls) {
    if (v.size() != max_drop.size())
      throw std::invalid_argument("correlation_table: control length mismatch");
    control_vecs.push_back(v);
  }
  CorrelationTable table;
  std::uint64_t row_index = 0;
  for (const auto& [name, values] : metric_values) {
    if (values.size() != max_drop.size())
      throw std::invalid_argument("correlation_table: metric length mismatch");
    CorrelationRow row;
    row.metric = name;
    row.raw_rho = spearman(values, max_drop);
    row.p_value = permutation_p_value(values, max_drop, stream.child(row_index), n_perms);
    if (!control_vecs.empty()) {
      try {
        row.partial_rho = partial_spearman(values, max_drop, control_vecs);
      } catch (const std::invalid_argument&) {
        row.partial_rho = std::nullopt;
      }
    }
    table.rows.push_back(std::move(row));
    ++row_index;
  }
  return table;
}

// Mean per (model, metric) over seeds, skipping undefined values.
inline std::map<std::string, std::map<std::string, double>> aggregate_by_model(
    const std::map<std::string, std::vector<std::map<std::string, MaybeScalar>>>& per_seed) {
  std::map<std::string, std::map<std::string, double>> out;
  for (const auto& [model_id, seed_maps] : per_seed) {
    std::map<std::string, double> sums;
    std::map<std::string, int> counts;
    for (const auto& m : seed_maps) {
      for (const auto& [name, value] : m) {
        if (value) {
          sums[name] += *value;
          ++counts[name];
        }
      }
    }
    for (const auto& [name, total] : sums) out[model_id][name] = total / counts[name];
  }
  return out;
}

// Positive iff the perturbation caused at least `threshold` accuracy drop.
inline std::vector<bool> ground_truth_labels(const std::vector<SweepRecord>& records,
                                             double degradation_threshold = 0.01) {
  std::vector<bool> labels;
  labels.reserve(records.size());
  for (const auto& rec : records) labels.push_back(rec.accuracy_drop >= degradation_threshold);
  return labels;
}

}  // namespace repgeo
