#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "repgeo/perturb.hpp"
#include "repgeo/types.hpp"

namespace repgeo {

using json = nlohmann::ordered_json;

namespace detail_io {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline bool looks_numeric(const std::string& token) {
  char* end = nullptr;
  std::string t = token;
  const char* s = t.c_str();
  std::strtod(s, &end);
  while (end && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
  return end != s && end && *end == '\0';
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    while (!tok.empty() && (tok.back() == '\r' || tok.back() == ' ')) tok.pop_back();
    std::size_t start = 0;
    while (start < tok.size() && tok[start] == ' ') ++start;
    out.push_back(tok.substr(start));
  }
  return out;
}

// 17 significant digits: round-trip exact for float64.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail_io

// Binary-array layout: magic 0x93 "NUMPY", version 1.0, little-endian
// row-major float32/float64, 2-D shape only.
inline Matrix read_binary_array(const std::string& raw, const std::string& path) {
  if (raw.size() < 10 || raw.compare(0, 6, "\x93NUMPY") != 0)
    throw std::invalid_argument(path + ": bad magic bytes");
  if (raw[6] != 1 || raw[7] != 0)
    throw std::invalid_argument(path + ": unsupported format version");
  const auto header_len = static_cast<std::size_t>(static_cast<unsigned char>(raw[8])) |
                          (static_cast<std::size_t>(static_cast<unsigned char>(raw[9])) << 8);
  if (raw.size() < 10 + header_len) throw std::invalid_argument(path + ": truncated header");
  const std::string header = raw.substr(10, header_len);

  auto find_value = [&](const std::string& key) -> std::string {
    auto pos = header.find("'" + key + "'");
    if (pos == std::string::npos) throw std::invalid_argument(path + ": header missing " + key);
    pos = header.find(':', pos);
    return header.substr(pos + 1);
  };

  std::string descr = find_value("descr");
  bool is_f8;
  if (descr.find("'<f8'") != std::string::npos)
    is_f8 = true;
  else if (descr.find("'<f4'") != std::string::npos)
    is_f8 = false;
  else
    throw std::invalid_argument(path + ": dtype must be <f4 or <f8");

  std::string fortran = find_value("fortran_order");
  if (fortran.find("True") != std::string::npos)
    throw std::invalid_argument(path + ": fortran_order arrays are not supported");

  std::string shape_str = find_value("shape");
  auto open = shape_str.find('(');
  auto close = shape_str.find(')');
  if (open == std::string::npos || close == std::string::npos)
    throw std::invalid_argument(path + ": malformed shape");
  std::string dims = shape_str.substr(open + 1, close - open - 1);
  std::vector<std::int64_t> shape;
  std::stringstream ss(dims);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::string trimmed;
    for (char c : tok)
      if (c != ' ') trimmed += c;
    if (!trimmed.empty()) shape.push_back(std::stoll(trimmed));
  }
  if (shape.size() != 2) throw std::invalid_argument(path + ": array must be 2-D");

  const auto n = static_cast<Eigen::Index>(shape[0]);
  const auto d = static_cast<Eigen::Index>(shape[1]);
  const std::size_t elem = is_f8 ? 8 : 4;
  const std::size_t need = static_cast<std::size_t>(n) * static_cast<std::size_t>(d) * elem;
  if (raw.size() - 10 - header_len < need) throw std::invalid_argument(path + ": truncated data");
  const char* data = raw.data() + 10 + header_len;

  Matrix x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const std::size_t off = (static_cast<std::size_t>(i) * static_cast<std::size_t>(d) +
                               static_cast<std::size_t>(j)) * elem;
      double v;
      if (is_f8) {
        std::memcpy(&v, data + off, 8);
      } else {
        float f;
        std::memcpy(&f, data + off, 4);
        v = static_cast<double>(f);
      }
      if (!std::isfinite(v))
        throw std::invalid_argument(path + ": non-finite value at (" + std::to_string(i) + "," +
                                    std::to_string(j) + ")");
      x(i, j) = v;
    }
  }
  return x;
}

inline Matrix read_csv_array(const std::string& raw, const std::string& path) {
  std::vector<std::vector<double>> rows;
  std::stringstream ss(raw);
  std::string line;
  bool first = true;
  std::size_t width = 0;
  std::int64_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto tokens = detail_io::split_csv_line(line);
    if (first) {
      first = false;
      // header row auto-detection: a non-numeric first row is skipped
      bool all_numeric = true;
      for (const auto& t : tokens)
        if (!detail_io::looks_numeric(t)) all_numeric = false;
      if (!all_numeric) continue;
    }
    std::vector<double> row;
    for (const auto& t : tokens) {
      if (!detail_io::looks_numeric(t))
        throw std::invalid_argument(path + ": non-numeric token '" + t + "' on line " +
                                    std::to_string(line_no));
      const double v = std::stod(t);
      if (!std::isfinite(v))
        throw std::invalid_argument(path + ": non-finite value on line " + std::to_string(line_no));
      row.push_back(v);
    }
    if (width == 0) width = row.size();
    if (row.size() != width)
      throw std::invalid_argument(path + ": ragged row on line " + std::to_string(line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument(path + ": no data rows");
  Matrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < width; ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return x;
}

inline Matrix read_array(const std::string& path) {
  const std::string raw = detail_io::read_file(path);
  if (raw.size() >= 6 && raw.compare(0, 6, "\x93NUMPY") == 0) return read_binary_array(raw, path);
  return read_csv_array(raw, path);
}

inline void write_array(const std::string& path, const Matrix& x) {
  std::ostringstream header;
  header << "{'descr': '<f8', 'fortran_order': False, 'shape': (" << x.rows() << ", " << x.cols()
         << "), }";
  std::string h = header.str();
  const std::size_t unpadded = 10 + h.size() + 1;
  const std::size_t padded = (unpadded + 63) / 64 * 64;
  h.append(padded - 10 - h.size() - 1, ' ');
  h += '\n';

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out.write("\x93NUMPY\x01\x00", 8);
  const auto len = static_cast<std::uint16_t>(h.size());
  char lenb[2] = {static_cast<char>(len & 0xff), static_cast<char>(len >> 8)};
  out.write(lenb, 2);
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double v = x(i, j);
      out.write(reinterpret_cast<const char*>(&v), 8);
    }
  }
}

// One integer per line (or a single CSV column); C inferred as max + 1, and
// every class in [0, C) must be present.
inline LabelVector read_labels(const std::string& path) {
  const std::string raw = detail_io::read_file(path);
  std::vector<int> labels;
  std::stringstream ss(raw);
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    auto tokens = detail_io::split_csv_line(line);
    if (tokens.size() != 1)
      throw std::invalid_argument(path + ": expected one label per line (line " +
                                  std::to_string(line_no) + ")");
    const std::string& t = tokens[0];
    std::size_t used = 0;
    int v;
    try {
      v = std::stoi(t, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument(path + ": non-integer token '" + t + "' on line " +
                                  std::to_string(line_no));
    }
    if (used != t.size())
      throw std::invalid_argument(path + ": non-integer token '" + t + "' on line " +
                                  std::to_string(line_no));
    labels.push_back(v);
  }
  return LabelVector::from(std::move(labels));
}

inline void write_labels(const std::string& path, const LabelVector& y) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  for (int v : y.labels) out << v << "\n";
}

inline json metric_report_to_json(const MetricReport& r) {
  json j;
  j["name"] = r.name;
  if (r.value)
    j["value"] = *r.value;
  else {
    j["value"] = nullptr;
    j["reason"] = r.note.empty() ? "undefined" : r.note;
  }
  j["params"] = json::object();
  for (const auto& [k, v] : r.params) j["params"][k] = v;
  return j;
}

inline void write_metric_reports_json(const std::string& path,
                                      const std::vector<MetricReport>& reports,
                                      std::int64_t seed) {
  json j;
  j["version"] = 1;
  j["seed"] = seed;
  j["results"] = json::array();
  for (const auto& r : reports) j["results"].push_back(metric_report_to_json(r));
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << j.dump(2) << "\n";
}

inline void write_metric_reports_csv(const std::string& path,
                                     const std::vector<MetricReport>& reports) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << "name,value,seed,skipped\n";
  for (const auto& r : reports) {
    out << r.name << ",";
    if (r.value) out << detail_io::fmt17(*r.value);
    out << "," << r.seed << ",";
    auto it = r.params.find("skipped");
    out << (it != r.params.end() ? detail_io::fmt17(it->second) : "0") << "\n";
  }
}

inline const char* sweep_csv_header() {
  return "model_id,kind,param_name,param_value,drift_shesha,drift_rdm_pearson,drift_cka,"
         "drift_procrustes,drift_swd,baseline_accuracy,accuracy,accuracy_drop";
}

inline void write_sweep_records_csv(const std::string& path, const std::string& model_id,
                                    const std::vector<SweepRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << sweep_csv_header() << "\n";
  auto cell = [](const MaybeScalar& v) { return v ? detail_io::fmt17(*v) : std::string(); };
  for (const auto& rec : records) {
    out << model_id << "," << to_string(rec.spec.kind) << "," << rec.spec.param_name() << ","
        << detail_io::fmt17(rec.spec.param_value()) << "," << cell(rec.drift.shesha) << ","
        << cell(rec.drift.rdm_pearson) << "," << cell(rec.drift.cka) << ","
        << cell(rec.drift.procrustes) << "," << cell(rec.drift.swd) << ","
        << detail_io::fmt17(rec.baseline_accuracy) << "," << detail_io::fmt17(rec.accuracy) << ","
        << detail_io::fmt17(rec.accuracy_drop) << "\n";
  }
}

inline json sweep_record_to_json(const std::string& model_id, const SweepRecord& rec) {
  json j;
  j["model_id"] = model_id;
  j["kind"] = to_string(rec.spec.kind);
  j["param_name"] = rec.spec.param_name();
  j["param_value"] = rec.spec.param_value();
  json drift = json::object();
  for (const auto& [name, v] : rec.drift.entries()) {
    if (v)
      drift[name] = *v;
    else
      drift[name] = nullptr;
  }
  j["drift"] = drift;
  j["baseline_accuracy"] = rec.baseline_accuracy;
  j["accuracy"] = rec.accuracy;
  j["accuracy_drop"] = rec.accuracy_drop;
  if (!rec.error.empty()) j["error"] = rec.error;
  return j;
}

inline void write_sweep_records_json(const std::string& path, const std::string& model_id,
                                     const std::vector<SweepRecord>& records, std::int64_t seed) {
  json j;
  j["version"] = 1;
  j["seed"] = seed;
  j["results"] = json::array();
  for (const auto& rec : records) j["results"].push_back(sweep_record_to_json(model_id, rec));
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << j.dump(2) << "\n";
}

struct ManifestEntry {
  std::string model_id;
  std::string embeddings_path;
  std::string labels_path;
};

struct RunManifest {
  std::vector<ManifestEntry> models;
  std::uint64_t master_seed = 3;
};

inline void write_manifest(const std::string& path, const RunManifest& m) {
  json j;
  j["version"] = 1;
  j["seed"] = static_cast<std::int64_t>(m.master_seed);
  j["models"] = json::array();
  for (const auto& e : m.models)
    j["models"].push_back({{"model_id", e.model_id},
                           {"embeddings", e.embeddings_path},
                           {"labels", e.labels_path}});
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write " + path);
  out << j.dump(2) << "\n";
}

inline RunManifest read_manifest(const std::string& path) {
  json j = json::parse(detail_io::read_file(path));
  RunManifest m;
  m.master_seed = j.value("seed", 3);
  std::map<std::string, bool> seen;
  for (const auto& e : j.at("models")) {
    ManifestEntry entry{e.at("model_id"), e.at("embeddings"), e.at("labels")};
    if (seen.count(entry.model_id))
      throw std::invalid_argument(path + ": duplicate model_id " + entry.model_id);
    seen[entry.model_id] = true;
    if (!std::filesystem::exists(entry.embeddings_path))
      throw std::invalid_argument(path + ": missing file " + entry.embeddings_path);
    if (!std::filesystem::exists(entry.labels_path))
      throw std::invalid_argument(path + ": missing file " + entry.labels_path);
    m.models.push_back(std::move(entry));
  }
  return m;
}

}  // namespace repgeo
