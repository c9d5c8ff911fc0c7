#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "repgeo/numerics.hpp"
#include "repgeo/rng.hpp"
#include "repgeo/types.hpp"

namespace repgeo {

namespace stream_tag {
inline constexpr std::uint64_t synth_embeddings = 401;
inline constexpr std::uint64_t grammar_corpus = 402;
}  // namespace stream_tag

// Parametric synthetic embedding model. `separation` scales the class
// centroids inside a `signal_dims`-dim subspace; `redundancy` copies signal
// coordinates into a fraction of the remaining dimensions (this is the knob
// that controls feature-split stability independently of task alignment).
struct SyntheticModelSpec {
  int n = 400;
  int d = 64;
  int n_classes = 2;
  double separation = 2.0;
  int signal_dims = 8;
  double redundancy = 0.0;
  double within_noise = 1.0;
  bool rotate = false;
  std::uint64_t seed = 3;

  void validate() const {
    if (n < 2 || d < 1 || n_classes < 1) throw std::invalid_argument("SyntheticModelSpec: bad sizes");
    if (signal_dims < 1 || signal_dims > d)
      throw std::invalid_argument("SyntheticModelSpec: signal_dims out of range");
    if (redundancy < 0.0 || redundancy > 1.0)
      throw std::invalid_argument("SyntheticModelSpec: redundancy out of [0,1]");
    if (!(within_noise > 0.0)) throw std::invalid_argument("SyntheticModelSpec: within_noise must be > 0");
    if (separation < 0.0) throw std::invalid_argument("SyntheticModelSpec: separation must be >= 0");
    if (n_classes > signal_dims)
      throw std::invalid_argument(
          "SyntheticModelSpec: cannot place " + std::to_string(n_classes) +
          " orthonormal centroids in a " + std::to_string(signal_dims) + "-dim subspace");
  }

  std::string id() const {
    std::ostringstream os;
    os << "n" << n << "_d" << d << "_c" << n_classes << "_s" << separation << "_k" << signal_dims
       << "_r" << redundancy << "_w" << within_noise << (rotate ? "_rot" : "") << "_seed" << seed;
    return os.str();
  }
};

// Balanced labeled Gaussian-cluster embeddings per the spec above.
inline std::pair<Matrix, LabelVector> generate_embeddings(const SyntheticModelSpec& spec) {
  spec.validate();
  RngStream stream(spec.seed, stream_tag::synth_embeddings);
  RngStream centroid_stream = stream.child(0);
  RngStream noise_stream = stream.child(1);
  RngStream redundancy_stream = stream.child(2);
  RngStream rotation_stream = stream.child(3);

  // Class centroids: separation * orthonormal directions in the signal subspace.
  Matrix q = random_orthogonal(spec.signal_dims, centroid_stream);
  std::vector<int> labels(static_cast<std::size_t>(spec.n), 0);
  const int base = spec.n / spec.n_classes;
  int cursor = spec.n - base * spec.n_classes;  // remainder goes to class 0
  {
    int i = 0;
    for (int c = 0; c < spec.n_classes; ++c) {
      const int count = base + (c == 0 ? cursor : 0);
      for (int k = 0; k < count; ++k) labels[static_cast<std::size_t>(i++)] = c;
    }
  }

  Matrix x = spec.within_noise * noise_stream.gaussian_matrix(spec.n, spec.d);
  for (int i = 0; i < spec.n; ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    x.row(i).head(spec.signal_dims) += (spec.separation * q.col(c)).transpose();
  }

  // Redundant dimensions: noisy copies of signal coordinates.
  const int spare = spec.d - spec.signal_dims;
  const int n_redundant = static_cast<int>(std::round(spec.redundancy * spare));
  for (int j = 0; j < n_redundant; ++j) {
    const int dst = spec.signal_dims + j;
    const int src = j % spec.signal_dims;
    x.col(dst) = x.col(src) + 0.1 * spec.within_noise * redundancy_stream.gaussian_vector(spec.n);
  }

  if (spec.rotate) x = x * random_orthogonal(spec.d, rotation_stream);
  return {std::move(x), LabelVector::from(std::move(labels))};
}

struct FamilyMember {
  std::string model_id;
  SyntheticModelSpec spec;
  Matrix embeddings;
  LabelVector labels;
};

// Cartesian grid over (separation, signal_dims, within_noise, redundancy).
inline std::vector<FamilyMember> generate_model_family(
    const SyntheticModelSpec& base, const std::vector<double>& separations,
    const std::vector<int>& signal_dims, const std::vector<double>& within_noises,
    const std::vector<double>& redundancies, std::uint64_t seed) {
  if (separations.empty() || signal_dims.empty() || within_noises.empty() || redundancies.empty())
    throw std::invalid_argument("generate_model_family: empty grid");
  std::vector<FamilyMember> family;
  for (double s : separations)
    for (int k : signal_dims)
      for (double w : within_noises)
        for (double r : redundancies) {
          SyntheticModelSpec spec = base;
          spec.separation = s;
          spec.signal_dims = k;
          spec.within_noise = w;
          spec.redundancy = r;
          spec.seed = seed;
          auto [x, y] = generate_embeddings(spec);
          family.push_back({spec.id(), spec, std::move(x), std::move(y)});
        }
  return family;
}

// Combinatorial sentiment grammar: "{context}, the {noun} was {adjective}".
struct GrammarSpec {
  std::array<std::string, 4> contexts = {"in my opinion", "overall", "considering everything",
                                         "to be honest"};
  std::array<std::string, 8> nouns = {"aspect", "element", "part",   "feature",
                                      "component", "unit",  "item", "factor"};
  std::array<std::string, 8> adjectives_positive = {"adequate", "fine",      "good",  "decent",
                                                    "solid",    "excellent", "superb", "exceptional"};
  std::array<std::string, 8> adjectives_negative = {"poor",   "bad",      "mediocre", "lacking",
                                                    "subpar", "terrible", "awful",    "dreadful"};
};

// All 512 unique sentences: positives (label 1) first, then negatives,
// each block in context-major, noun-middle, adjective-minor order.
inline std::vector<std::pair<std::string, int>> enumerate_grammar(const GrammarSpec& g = {}) {
  std::vector<std::pair<std::string, int>> out;
  out.reserve(512);
  for (int polarity = 1; polarity >= 0; --polarity) {
    const auto& adjectives = polarity == 1 ? g.adjectives_positive : g.adjectives_negative;
    for (const auto& context : g.contexts)
      for (const auto& noun : g.nouns)
        for (const auto& adjective : adjectives)
          out.emplace_back(context + ", the " + noun + " was " + adjective, polarity);
  }
  return out;
}

// Balanced resampling with replacement to n_total sentences (or each unique
// sentence exactly once when unique_only).
inline std::vector<std::pair<std::string, int>> generate_grammar_corpus(int n_total,
                                                                        std::uint64_t seed,
                                                                        bool unique_only = false,
                                                                        const GrammarSpec& g = {}) {
  auto all = enumerate_grammar(g);
  if (unique_only) return all;
  if (n_total < 2) throw std::invalid_argument("generate_grammar_corpus: n_total must be >= 2");
  RngStream stream(seed, stream_tag::grammar_corpus);
  const int per_polarity = 256;
  const int n_pos = n_total / 2;
  std::vector<std::pair<std::string, int>> corpus;
  corpus.reserve(static_cast<std::size_t>(n_total));
  for (int i = 0; i < n_total; ++i) {
    const bool positive = i < n_pos;
    const auto offset = positive ? 0 : per_polarity;
    corpus.push_back(all[static_cast<std::size_t>(
        offset + static_cast<int>(stream.uniform_int(per_polarity)))]);
  }
  return corpus;
}

}  // namespace repgeo
