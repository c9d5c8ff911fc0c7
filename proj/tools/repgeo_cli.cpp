// repgeo: representation-geometry analytics CLI.
//
// Exit codes: 0 success, 2 input/validation error, 3 numeric failure,
// 4 partial success (some grid points failed; failures listed in the output).

#include <cstdlib>
#include <filesystem>
#include <fnmatch.h>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <repgeo/repgeo.hpp>

namespace fs = std::filesystem;
using namespace repgeo;

namespace {

// Stream indices for draws owned by the CLI itself (library tags live in
// stream_tag and stop at 402).
constexpr std::uint64_t kDriftProjectionsTag = 501;
constexpr std::uint64_t kCanaryTag = 502;

std::string default_out_dir() {
  const char* env = std::getenv("REPGEO_OUT_DIR");
  return env && *env ? env : ".";
}

std::string resolve_out(const std::string& out, const std::string& fallback_name) {
  if (!out.empty()) return out;
  return (fs::path(default_out_dir()) / fallback_name).string();
}

LabelVector load_labels_for(const Matrix& x, const std::string& path) {
  LabelVector y = read_labels(path);
  if (y.size() != x.rows())
    throw std::invalid_argument(path + ": " + std::to_string(y.size()) + " labels for " +
                                std::to_string(x.rows()) + " embedding rows");
  return y;
}

std::vector<MetricReport> drift_to_reports(const DriftReport& r, std::int64_t seed) {
  std::vector<MetricReport> out;
  for (const auto& [name, value] : r.entries()) {
    MetricReport m;
    m.name = "drift_" + name;
    m.value = value;
    m.seed = seed;
    if (!value) m.note = "undefined";
    out.push_back(std::move(m));
  }
  return out;
}

// ---------------------------------------------------------------- metrics --

struct MetricsArgs {
  std::string embeddings, labels, out, format = "json";
  std::uint64_t seed = 3;
  int splits = 30;
  int bootstrap = 50;
  double subsample = 0.5;
};

int cmd_metrics(const MetricsArgs& a) {
  Matrix x = read_array(a.embeddings);
  std::optional<LabelVector> y;
  if (!a.labels.empty()) y = load_labels_for(x, a.labels);

  StabilityConfig cfg;
  cfg.n_splits = a.splits;
  cfg.n_bootstrap = a.bootstrap;
  cfg.subsample_fraction = a.subsample;
  cfg.master_seed = a.seed;
  cfg.validate();

  auto reports = compute_all(x, y ? &*y : nullptr, cfg);
  const std::string out = resolve_out(a.out, "metrics." + a.format);
  if (a.format == "json")
    write_metric_reports_json(out, reports, static_cast<std::int64_t>(a.seed));
  else
    write_metric_reports_csv(out, reports);
  std::cout << "wrote " << out << "\n";
  return 0;
}

// ------------------------------------------------------------------ drift --

struct DriftArgs {
  std::string a, b, out;
  std::uint64_t seed = 3;
  int projections = 100;
};

int cmd_drift(const DriftArgs& a) {
  Matrix xa = read_array(a.a);
  Matrix xb = read_array(a.b);
  check_paired(xa, xb, 3);
  if (a.projections < 1) throw std::invalid_argument("--projections must be >= 1");

  DriftReport r = drift_report(xa, xb, RngStream(a.seed, kDriftProjectionsTag), a.projections);
  const std::string out = resolve_out(a.out, "drift.json");
  write_metric_reports_json(out, drift_to_reports(r, static_cast<std::int64_t>(a.seed)),
                            static_cast<std::int64_t>(a.seed));
  std::cout << "wrote " << out << "\n";
  return 0;
}

// ------------------------------------------------------------------ steer --

struct SteerArgs {
  std::string embeddings, labels, out, controls = "off";
  std::vector<std::uint64_t> seeds;
  std::vector<double> alphas;
  int splits = 30;
  int bootstrap = 50;
};

int cmd_steer(const SteerArgs& a) {
  Matrix x = read_array(a.embeddings);
  LabelVector y = load_labels_for(x, a.labels);
  if (a.controls != "on" && a.controls != "off")
    throw std::invalid_argument("--controls must be 'on' or 'off'");

  StabilityConfig cfg;
  cfg.n_splits = a.splits;
  cfg.n_bootstrap = a.bootstrap;
  cfg.validate();

  SplitHalfOptions opts;
  if (!a.alphas.empty()) opts.alphas = a.alphas;
  opts.controls = a.controls == "on";
  const std::vector<std::uint64_t> seeds = a.seeds.empty() ? default_seed_list() : a.seeds;

  auto records = run_split_half(x, y, cfg, seeds, opts);

  json j;
  j["version"] = 1;
  j["seeds"] = seeds;
  j["alphas"] = opts.alphas;
  j["records"] = json::array();
  std::map<std::string, double> metric_sums;
  std::map<std::string, int> metric_counts;
  double drop_sum = 0.0;
  for (const auto& rec : records) {
    json rj;
    rj["seed"] = rec.seed;
    rj["metrics"] = json::array();
    for (const auto& m : rec.metrics) {
      rj["metrics"].push_back(metric_report_to_json(m));
      if (m.value) {
        metric_sums[m.name] += *m.value;
        ++metric_counts[m.name];
      }
    }
    json sj;
    sj["acc0"] = rec.steering.acc0;
    sj["max_drop"] = rec.steering.max_drop;
    sj["acc_per_alpha"] = json::array();
    for (const auto& [alpha, acc] : rec.steering.acc_per_alpha)
      sj["acc_per_alpha"].push_back({alpha, acc});
    rj["steering"] = sj;
    if (rec.random_direction_drop) rj["random_direction_drop"] = *rec.random_direction_drop;
    if (!rec.shuffled_label_means.empty()) rj["shuffled_label_means"] = rec.shuffled_label_means;
    drop_sum += rec.steering.max_drop;
    j["records"].push_back(std::move(rj));
  }
  json agg;
  agg["mean_max_drop"] = drop_sum / static_cast<double>(records.size());
  agg["mean_metrics"] = json::object();
  for (const auto& [name, total] : metric_sums)
    agg["mean_metrics"][name] = total / metric_counts[name];
  j["aggregate"] = agg;

  const std::string out = resolve_out(a.out, "steer.json");
  std::ofstream f(out);
  if (!f) throw std::invalid_argument("cannot write " + out);
  f << j.dump(2) << "\n";
  std::cout << "wrote " << out << "\n";
  return 0;
}

// ----------------------------------------------------------------- canary --

struct CanaryArgs {
  std::string embeddings, labels, out, perturb = "gaussian", format = "json", model_id;
  std::uint64_t seed = 3;
  int jobs = 1;
  int projections = 100;
  int folds = 5;
};

int cmd_canary(const CanaryArgs& a) {
  Matrix x = read_array(a.embeddings);
  LabelVector y = load_labels_for(x, a.labels);
  if (a.jobs < 1) throw std::invalid_argument("--jobs must be >= 1");

  std::vector<PerturbationSpec> grid;
  auto append = [&grid](std::vector<PerturbationSpec> g) {
    grid.insert(grid.end(), g.begin(), g.end());
  };
  if (a.perturb == "gaussian")
    append(gaussian_grid());
  else if (a.perturb == "quantize")
    append(quantize_grid());
  else if (a.perturb == "lowrank")
    append(lowrank_grid());
  else if (a.perturb == "all") {
    append(gaussian_grid());
    append(quantize_grid());
    append(lowrank_grid());
  } else {
    throw std::invalid_argument("--perturb must be gaussian, quantize, lowrank, or all");
  }

  const std::string model_id =
      a.model_id.empty() ? fs::path(a.embeddings).stem().string() : a.model_id;
  auto records =
      run_canary(x, y, grid, RngStream(a.seed, kCanaryTag), a.projections, a.folds, a.jobs);

  const std::string out = resolve_out(a.out, "canary." + a.format);
  if (a.format == "json")
    write_sweep_records_json(out, model_id, records, static_cast<std::int64_t>(a.seed));
  else
    write_sweep_records_csv(out, model_id, records);
  std::cout << "wrote " << out << "\n";

  int failed = 0;
  for (const auto& rec : records)
    if (!rec.error.empty()) ++failed;
  if (failed > 0) {
    std::cerr << failed << " of " << records.size() << " grid points failed\n";
    return 4;
  }
  return 0;
}

// ---------------------------------------------------------------- analyze --

struct AnalyzeArgs {
  std::vector<std::string> inputs;
  std::string mode = "correlations", out;
  double threshold = 0.05;
  double stable = 0.01;
  std::uint64_t seed = 3;
  int perms = 10000;
};

struct LoadedRecord {
  std::string model_id;
  std::string kind;
  double param_value = 0.0;
  SweepRecord rec;  // drift/accuracy fields populated from the file
};

std::vector<std::string> expand_inputs(const std::vector<std::string>& patterns) {
  std::vector<std::string> files;
  for (const auto& pat : patterns) {
    if (pat.find('*') == std::string::npos && pat.find('?') == std::string::npos) {
      files.push_back(pat);
      continue;
    }
    fs::path p(pat);
    fs::path dir = p.parent_path().empty() ? "." : p.parent_path();
    const std::string name = p.filename().string();
    std::vector<std::string> matched;
    if (fs::is_directory(dir))
      for (const auto& entry : fs::directory_iterator(dir))
        if (fnmatch(name.c_str(), entry.path().filename().string().c_str(), 0) == 0)
          matched.push_back(entry.path().string());
    std::sort(matched.begin(), matched.end());
    files.insert(files.end(), matched.begin(), matched.end());
  }
  if (files.empty()) throw std::invalid_argument("no input files");
  return files;
}

std::vector<LoadedRecord> load_sweep_files(const std::vector<std::string>& files) {
  std::vector<LoadedRecord> out;
  for (const auto& path : files) {
    json j = json::parse(detail_io::read_file(path));
    if (!j.contains("results"))
      throw std::invalid_argument(path + ": not a sweep result file");
    for (const auto& rj : j.at("results")) {
      LoadedRecord lr;
      lr.model_id = rj.at("model_id");
      lr.kind = rj.at("kind");
      lr.param_value = rj.at("param_value");
      auto get = [&](const char* name) -> MaybeScalar {
        const auto& v = rj.at("drift").at(name);
        if (v.is_null()) return std::nullopt;
        return v.get<double>();
      };
      lr.rec.drift.shesha = get("shesha");
      lr.rec.drift.rdm_pearson = get("rdm_pearson");
      lr.rec.drift.cka = get("cka");
      lr.rec.drift.procrustes = get("procrustes");
      lr.rec.drift.swd = get("swd");
      lr.rec.baseline_accuracy = rj.at("baseline_accuracy");
      lr.rec.accuracy = rj.at("accuracy");
      lr.rec.accuracy_drop = rj.at("accuracy_drop");
      if (rj.contains("error")) lr.rec.error = rj.at("error");
      out.push_back(std::move(lr));
    }
  }
  return out;
}

const std::vector<std::string>& drift_metric_names() {
  static const std::vector<std::string> names = {"shesha", "rdm_pearson", "cka", "procrustes",
                                                 "swd"};
  return names;
}

int cmd_analyze(const AnalyzeArgs& a) {
  auto loaded = load_sweep_files(expand_inputs(a.inputs));
  json j;
  j["version"] = 1;
  j["mode"] = a.mode;

  if (a.mode == "falsealarms") {
    std::vector<SweepRecord> recs;
    for (const auto& lr : loaded) recs.push_back(lr.rec);
    json rates = json::object();
    for (const auto& name : drift_metric_names()) {
      auto rate = false_alarm_rate(recs, name, a.threshold, a.stable);
      if (rate)
        rates[name] = *rate;
      else
        rates[name] = nullptr;
    }
    j["false_alarm_rates"] = rates;
  } else if (a.mode == "roc") {
    std::vector<SweepRecord> recs;
    for (const auto& lr : loaded)
      if (lr.rec.error.empty()) recs.push_back(lr.rec);
    auto truth = ground_truth_labels(recs, a.stable);
    json rocs = json::object();
    for (const auto& name : drift_metric_names()) {
      std::vector<double> scores;
      std::vector<bool> pos;
      for (std::size_t i = 0; i < recs.size(); ++i) {
        MaybeScalar v;
        for (const auto& [n, val] : recs[i].drift.entries())
          if (n == name) v = val;
        if (!v) continue;
        scores.push_back(*v);
        pos.push_back(truth[i]);
      }
      try {
        RocResult r = roc_auc(scores, pos);
        rocs[name] = {{"auc", r.auc}, {"sensitivity_at_fpr05", r.sensitivity_at_fpr05}};
      } catch (const std::invalid_argument&) {
        rocs[name] = nullptr;
      }
    }
    j["roc"] = rocs;
  } else if (a.mode == "earlywarning") {
    std::map<std::string, std::vector<const LoadedRecord*>> by_model;
    for (const auto& lr : loaded)
      if (lr.kind == "gaussian" && lr.rec.error.empty()) by_model[lr.model_id].push_back(&lr);
    if (by_model.empty()) throw std::invalid_argument("no gaussian sweep records in inputs");
    j["models"] = json::array();
    for (auto& [model_id, recs] : by_model) {
      std::sort(recs.begin(), recs.end(), [](const LoadedRecord* x, const LoadedRecord* y) {
        return x->param_value < y->param_value;
      });
      ModelSeries series;
      series.model_id = model_id;
      for (const auto* lr : recs) {
        series.magnitudes.push_back(lr->param_value);
        for (const auto& [name, v] : lr->rec.drift.entries())
          series.drift[name].push_back(v ? *v : std::numeric_limits<double>::quiet_NaN());
      }
      json mj;
      mj["model_id"] = model_id;
      mj["detection_magnitude"] = json::object();
      for (const auto& name : drift_metric_names()) {
        auto mag = detection_threshold(series, name, a.threshold);
        if (mag)
          mj["detection_magnitude"][name] = *mag;
        else
          mj["detection_magnitude"][name] = nullptr;
      }
      j["models"].push_back(std::move(mj));
    }
  } else if (a.mode == "correlations") {
    std::map<std::string, std::vector<double>> metric_values;
    std::vector<double> drops;
    for (const auto& lr : loaded) {
      if (!lr.rec.error.empty()) continue;
      bool all_defined = true;
      for (const auto& [name, v] : lr.rec.drift.entries())
        if (!v) all_defined = false;
      if (!all_defined) continue;
      for (const auto& [name, v] : lr.rec.drift.entries()) metric_values[name].push_back(*v);
      drops.push_back(lr.rec.accuracy_drop);
    }
    auto table = correlation_table(metric_values, drops, {},
                                   RngStream(a.seed, stream_tag::permutation_test), a.perms);
    j["rows"] = json::array();
    for (const auto& row : table.rows) {
      json rj;
      rj["metric"] = row.metric;
      rj["spearman"] = row.raw_rho ? json(*row.raw_rho) : json(nullptr);
      rj["p_value"] = row.p_value ? json(*row.p_value) : json(nullptr);
      rj["partial_spearman"] = row.partial_rho ? json(*row.partial_rho) : json(nullptr);
      j["rows"].push_back(std::move(rj));
    }
  } else {
    throw std::invalid_argument(
        "--mode must be correlations, earlywarning, falsealarms, or roc");
  }

  const std::string out = resolve_out(a.out, "analyze_" + a.mode + ".json");
  std::ofstream f(out);
  if (!f) throw std::invalid_argument("cannot write " + out);
  f << j.dump(2) << "\n";
  std::cout << "wrote " << out << "\n";
  return 0;
}

// ---------------------------------------------------------------- datagen --

struct DatagenSyntheticArgs {
  std::string out;
  std::uint64_t seed = 3;
  int n = 400, d = 64, classes = 2;
  std::vector<double> separations = {0.5, 1.0, 2.0, 4.0};
  std::vector<int> signal_dims = {2, 8};
  std::vector<double> noises = {1.0};
  std::vector<double> redundancies = {0.0, 0.5};
};

int cmd_datagen_synthetic(const DatagenSyntheticArgs& a) {
  const fs::path dir = a.out.empty() ? fs::path(default_out_dir()) : fs::path(a.out);
  fs::create_directories(dir);
  SyntheticModelSpec base;
  base.n = a.n;
  base.d = a.d;
  base.n_classes = a.classes;
  auto family = generate_model_family(base, a.separations, a.signal_dims, a.noises,
                                      a.redundancies, a.seed);
  RunManifest manifest;
  manifest.master_seed = a.seed;
  for (const auto& member : family) {
    const std::string emb = (dir / (member.model_id + ".npy")).string();
    const std::string lab = (dir / (member.model_id + ".labels")).string();
    write_array(emb, member.embeddings);
    write_labels(lab, member.labels);
    manifest.models.push_back({member.model_id, emb, lab});
  }
  write_manifest((dir / "manifest.json").string(), manifest);
  std::cout << "wrote " << family.size() << " models to " << dir.string() << "\n";
  return 0;
}

struct DatagenGrammarArgs {
  std::string out;
  std::uint64_t seed = 3;
  int n = 1000;
  bool unique = false;
};

int cmd_datagen_grammar(const DatagenGrammarArgs& a) {
  const fs::path dir = a.out.empty() ? fs::path(default_out_dir()) : fs::path(a.out);
  fs::create_directories(dir);
  auto corpus = generate_grammar_corpus(a.n, a.seed, a.unique);
  const std::string path = (dir / "grammar.tsv").string();
  std::ofstream f(path);
  if (!f) throw std::invalid_argument("cannot write " + path);
  for (const auto& [sentence, label] : corpus) f << sentence << "\t" << label << "\n";
  std::cout << "wrote " << corpus.size() << " sentences to " << path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"representation-geometry stability, drift, and steering toolkit"};
  app.require_subcommand(1);

  MetricsArgs ma;
  auto* metrics = app.add_subcommand("metrics", "stability metrics for one embedding matrix");
  metrics->add_option("--embeddings", ma.embeddings)->required();
  metrics->add_option("--labels", ma.labels);
  metrics->add_option("--seed", ma.seed);
  metrics->add_option("--splits", ma.splits);
  metrics->add_option("--bootstrap", ma.bootstrap);
  metrics->add_option("--subsample", ma.subsample);
  metrics->add_option("--out", ma.out);
  metrics->add_option("--format", ma.format)->check(CLI::IsMember({"json", "csv"}));

  DriftArgs da;
  auto* drift = app.add_subcommand("drift", "drift metrics between two paired snapshots");
  drift->add_option("--a", da.a)->required();
  drift->add_option("--b", da.b)->required();
  drift->add_option("--seed", da.seed);
  drift->add_option("--projections", da.projections);
  drift->add_option("--out", da.out);

  SteerArgs sa;
  auto* steer = app.add_subcommand("steer", "split-half probe steering protocol");
  steer->add_option("--embeddings", sa.embeddings)->required();
  steer->add_option("--labels", sa.labels)->required();
  steer->add_option("--seeds", sa.seeds)->delimiter(',');
  steer->add_option("--alphas", sa.alphas)->delimiter(',');
  steer->add_option("--controls", sa.controls);
  steer->add_option("--splits", sa.splits);
  steer->add_option("--bootstrap", sa.bootstrap);
  steer->add_option("--out", sa.out);

  CanaryArgs ca;
  auto* canary = app.add_subcommand("canary", "perturbation sweep with paired drift/accuracy");
  canary->add_option("--embeddings", ca.embeddings)->required();
  canary->add_option("--labels", ca.labels)->required();
  canary->add_option("--perturb", ca.perturb);
  canary->add_option("--seed", ca.seed);
  canary->add_option("--jobs", ca.jobs);
  canary->add_option("--projections", ca.projections);
  canary->add_option("--folds", ca.folds);
  canary->add_option("--model-id", ca.model_id);
  canary->add_option("--out", ca.out);
  canary->add_option("--format", ca.format)->check(CLI::IsMember({"json", "csv"}));

  AnalyzeArgs aa;
  auto* analyze = app.add_subcommand("analyze", "cross-run analysis over sweep outputs");
  analyze->add_option("--inputs", aa.inputs)->required();
  analyze->add_option("--mode", aa.mode);
  analyze->add_option("--threshold", aa.threshold);
  analyze->add_option("--stable", aa.stable);
  analyze->add_option("--seed", aa.seed);
  analyze->add_option("--perms", aa.perms);
  analyze->add_option("--out", aa.out);

  auto* datagen = app.add_subcommand("datagen", "synthetic data generators");
  datagen->require_subcommand(1);
  DatagenSyntheticArgs dsa;
  auto* synthetic = datagen->add_subcommand("synthetic", "parametric embedding family");
  synthetic->add_option("--out", dsa.out);
  synthetic->add_option("--seed", dsa.seed);
  synthetic->add_option("--n", dsa.n);
  synthetic->add_option("--d", dsa.d);
  synthetic->add_option("--classes", dsa.classes);
  synthetic->add_option("--separations", dsa.separations)->delimiter(',');
  synthetic->add_option("--signal-dims", dsa.signal_dims)->delimiter(',');
  synthetic->add_option("--noises", dsa.noises)->delimiter(',');
  synthetic->add_option("--redundancies", dsa.redundancies)->delimiter(',');
  DatagenGrammarArgs dga;
  auto* grammar = datagen->add_subcommand("grammar", "combinatorial sentiment corpus");
  grammar->add_option("--out", dga.out);
  grammar->add_option("--seed", dga.seed);
  grammar->add_option("--n", dga.n);
  grammar->add_flag("--unique", dga.unique);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (metrics->parsed()) return cmd_metrics(ma);
    if (drift->parsed()) return cmd_drift(da);
    if (steer->parsed()) return cmd_steer(sa);
    if (canary->parsed()) return cmd_canary(ca);
    if (analyze->parsed()) return cmd_analyze(aa);
    if (synthetic->parsed()) return cmd_datagen_synthetic(dsa);
    if (grammar->parsed()) return cmd_datagen_grammar(dga);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
