#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace repgeo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Correlations and metrics that are undefined on degenerate input (constant
// vectors, zero variance) carry no value; downstream aggregation skips them.
using MaybeScalar = std::optional<double>;

// n integer class labels in [0, C), every class present.
struct LabelVector {
  std::vector<int> labels;
  int num_classes = 0;

  static LabelVector from(std::vector<int> raw) {
    if (raw.empty()) throw std::invalid_argument("label vector is empty");
    int max_label = 0;
    for (int v : raw) {
      if (v < 0) throw std::invalid_argument("negative label " + std::to_string(v));
      max_label = std::max(max_label, v);
    }
    const int c = max_label + 1;
    std::vector<int> counts(static_cast<std::size_t>(c), 0);
    for (int v : raw) ++counts[static_cast<std::size_t>(v)];
    for (int k = 0; k < c; ++k) {
      if (counts[static_cast<std::size_t>(k)] == 0)
        throw std::invalid_argument("class " + std::to_string(k) + " has no samples");
    }
    return LabelVector{std::move(raw), c};
  }

  int size() const { return static_cast<int>(labels.size()); }

  std::vector<int> class_counts() const {
    std::vector<int> counts(static_cast<std::size_t>(num_classes), 0);
    for (int v : labels) ++counts[static_cast<std::size_t>(v)];
    return counts;
  }

  std::vector<std::vector<int>> class_indices() const {
    std::vector<std::vector<int>> idx(static_cast<std::size_t>(num_classes));
    for (int i = 0; i < size(); ++i)
      idx[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])].push_back(i);
    return idx;
  }
};

// One named metric value with the parameters and seed it was computed under.
struct MetricReport {
  std::string name;
  MaybeScalar value;
  std::map<std::string, double> params;  // ordered: stable serialization
  std::int64_t seed = 0;
  std::string note;  // reason when value is undefined
};

inline void require_finite(const Matrix& x, const char* what) {
  if (!x.allFinite())
    throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

}  // namespace repgeo
