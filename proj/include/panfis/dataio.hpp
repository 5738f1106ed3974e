#pragma once

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "panfis/fusion.hpp"
#include "panfis/inference.hpp"
#include "panfis/rule_model.hpp"

namespace panfis {

/// Column-ordered dataset: one row per sample, label stored separately.
struct Dataset {
  using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajorMatrix x;           // n x p
  std::vector<ClassLabel> y;  // n
  int classes = 0;

  std::size_t size() const { return y.size(); }
  int dim() const { return static_cast<int>(x.cols()); }
  Eigen::VectorXd row(std::size_t i) const { return x.row(static_cast<Eigen::Index>(i)); }
  Sample sample(std::size_t i) const { return {row(i), y[i]}; }
};

struct CsvSchema {
  bool skip_header = false;
  int label_base = 0;       // labels in the file start at 0 or 1
  bool has_labels = true;   // false: every column is a feature
};

struct SynthConfig {
  std::size_t n = 0;
  int classes = 4;
  std::vector<Eigen::VectorXd> class_means;  // empty: 1-D RSS-like dBm levels
  double sigma = 2.0;
  double drift_rate = 0.0;  // mean shift per sample index
  std::uint64_t seed = 0;
};

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline bool parse_double(const std::string& cell, double& out) {
  const std::string t = trim(cell);
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size() && std::isfinite(out);
}

inline bool parse_long(const std::string& cell, long long& out) {
  const std::string t = trim(cell);
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtoll(t.c_str(), &end, 10);
  return end == t.c_str() + t.size();
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

}  // namespace detail

/// Load a comma-separated dataset, label in the last column. Order
/// preserving; labels normalized to 0-based. Malformed rows raise
/// ParseError with the 1-based line number.
inline Dataset load_csv(const std::string& path, const CsvSchema& schema = {}) {
  std::ifstream in(path);
  if (!in) throw UsageError("load_csv: cannot open " + path);

  std::vector<std::vector<double>> rows;
  std::vector<ClassLabel> labels;
  std::size_t lineno = 0;
  std::size_t expected_cols = 0;
  std::string line;
  bool header_pending = schema.skip_header;

  while (std::getline(in, line)) {
    ++lineno;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    if (detail::trim(line).empty()) continue;
    const std::vector<std::string> cells = detail::split_csv(line);
    const std::size_t min_cols = schema.has_labels ? 2 : 1;
    if (expected_cols == 0) {
      if (cells.size() < min_cols) throw ParseError("too few columns", lineno);
      expected_cols = cells.size();
    } else if (cells.size() != expected_cols) {
      throw ParseError("ragged row: expected " + std::to_string(expected_cols) + " columns, got " +
                           std::to_string(cells.size()),
                       lineno);
    }

    const std::size_t feature_count = schema.has_labels ? cells.size() - 1 : cells.size();
    std::vector<double> feats(feature_count);
    for (std::size_t j = 0; j < feature_count; ++j) {
      if (!detail::parse_double(cells[j], feats[j])) {
        throw ParseError("non-numeric cell '" + detail::trim(cells[j]) + "'", lineno);
      }
    }
    ClassLabel label = 0;
    if (schema.has_labels) {
      long long raw = 0;
      if (!detail::parse_long(cells.back(), raw)) {
        throw ParseError("non-integer label '" + detail::trim(cells.back()) + "'", lineno);
      }
      raw -= schema.label_base;
      if (raw < 0) throw ParseError("label below declared base", lineno);
      label = static_cast<ClassLabel>(raw);
    }
    rows.push_back(std::move(feats));
    labels.push_back(label);
  }

  Dataset ds;
  const std::size_t n = rows.size();
  const std::size_t p = n > 0 ? rows.front().size() : 0;
  ds.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) ds.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  ds.y = std::move(labels);
  if (schema.has_labels) {
    for (ClassLabel l : ds.y) ds.classes = std::max(ds.classes, l + 1);
  }
  return ds;
}

/// Write a dataset as CSV, features then label, value-exact precision.
inline void write_csv(const std::string& path, const Dataset& ds, bool with_labels = true) {
  std::ofstream out(path);
  if (!out) throw UsageError("write_csv: cannot open " + path + " for writing");
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (int j = 0; j < ds.dim(); ++j) {
      if (j) out << ',';
      out << detail::fmt17(ds.x(static_cast<Eigen::Index>(i), j));
    }
    if (with_labels) out << ',' << ds.y[i];
    out << '\n';
  }
}

/// Deterministic synthetic RSS-like stream: classes round-robin over the
/// sample index, features Normal(mean_c + drift_rate * t, sigma^2).
inline Dataset synth_rss(const SynthConfig& cfg) {
  if (cfg.classes < 1) throw UsageError("synth_rss: classes must be positive");
  if (cfg.n < static_cast<std::size_t>(cfg.classes)) {
    throw UsageError("synth_rss: n must be at least the class count");
  }
  if (!(cfg.sigma > 0.0)) throw UsageError("synth_rss: sigma must be positive");

  std::vector<Eigen::VectorXd> means = cfg.class_means;
  if (means.empty()) {
    for (int c = 0; c < cfg.classes; ++c) {
      means.push_back(Eigen::VectorXd::Constant(1, -50.0 - 8.0 * c));
    }
  }
  if (static_cast<int>(means.size()) != cfg.classes) {
    throw UsageError("synth_rss: one mean vector per class required");
  }
  const Eigen::Index p = means.front().size();
  for (const Eigen::VectorXd& m : means) {
    if (m.size() != p) throw UsageError("synth_rss: class means disagree on dimension");
  }

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  Dataset ds;
  ds.classes = cfg.classes;
  ds.x.resize(static_cast<Eigen::Index>(cfg.n), p);
  ds.y.resize(cfg.n);
  for (std::size_t t = 0; t < cfg.n; ++t) {
    const int c = static_cast<int>(t % static_cast<std::size_t>(cfg.classes));
    ds.y[t] = c;
    for (Eigen::Index j = 0; j < p; ++j) {
      ds.x(static_cast<Eigen::Index>(t), j) =
          means[static_cast<std::size_t>(c)](j) + cfg.drift_rate * static_cast<double>(t) +
          cfg.sigma * noise(rng);
    }
  }
  return ds;
}

inline constexpr const char* kModelMagic = "PANFIS-FUSE v1";

/// Serialize a rule base in the versioned line-oriented text format.
inline void save_model(const RuleBase& base, std::ostream& out) {
  out << kModelMagic << " p=" << base.p << " classes=" << base.classes
      << " rules=" << base.rules.size() << '\n';
  for (const Rule& r : base.rules) {
    out << "N=" << r.support << '\n';
    for (int j = 0; j < base.p; ++j) {
      if (j) out << ' ';
      out << detail::fmt17(r.center(j));
    }
    out << '\n';
    for (int i = 0; i < base.p; ++i) {
      for (int j = 0; j < base.p; ++j) {
        if (j) out << ' ';
        out << detail::fmt17(r.inv_dispersion(i, j));
      }
      out << '\n';
    }
    for (int i = 0; i < base.p + 1; ++i) {
      for (int j = 0; j < base.classes; ++j) {
        if (j) out << ' ';
        out << detail::fmt17(r.consequent(i, j));
      }
      out << '\n';
    }
  }
}

inline void save_model(const RuleBase& base, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("save_model: cannot open " + path + " for writing");
  save_model(base, out);
}

inline std::string model_to_string(const RuleBase& base) {
  std::ostringstream ss;
  save_model(base, ss);
  return ss.str();
}

namespace detail {

inline std::string next_model_line(std::istream& in, std::size_t& lineno) {
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (!trim(line).empty()) return line;
  }
  throw FormatError("truncated model file after line " + std::to_string(lineno));
}

inline Eigen::VectorXd parse_row(const std::string& line, int count, std::size_t lineno) {
  std::istringstream ss(line);
  Eigen::VectorXd v(count);
  for (int i = 0; i < count; ++i) {
    std::string tok;
    if (!(ss >> tok)) {
      throw FormatError("line " + std::to_string(lineno) + ": expected " + std::to_string(count) +
                        " values");
    }
    double d = 0.0;
    if (!parse_double(tok, d)) {
      throw FormatError("line " + std::to_string(lineno) + ": bad number '" + tok + "'");
    }
    v(i) = d;
  }
  std::string extra;
  if (ss >> extra) {
    throw FormatError("line " + std::to_string(lineno) + ": more than " + std::to_string(count) +
                      " values");
  }
  return v;
}

}  // namespace detail

/// Parse a model file; inverse dispersions are verified SPD per rule.
inline RuleBase load_model(std::istream& in) {
  std::size_t lineno = 0;
  std::string header;
  if (!std::getline(in, header)) throw FormatError("empty model file");
  ++lineno;
  int p = 0;
  int classes = 0;
  long long rules = 0;
  {
    std::istringstream hs(header);
    std::string word, version, tp, tc, tr;
    hs >> word >> version >> tp >> tc >> tr;
    const std::string magic = word + " " + version;
    if (magic != kModelMagic) throw FormatError("unsupported model header '" + magic + "'");
    if (std::sscanf(tp.c_str(), "p=%d", &p) != 1 ||
        std::sscanf(tc.c_str(), "classes=%d", &classes) != 1 ||
        std::sscanf(tr.c_str(), "rules=%lld", &rules) != 1) {
      throw FormatError("malformed model header '" + header + "'");
    }
    if (p < 1 || classes < 1 || rules < 0) throw FormatError("model header out of range");
  }

  RuleBase base;
  base.p = p;
  base.classes = classes;
  for (long long ri = 0; ri < rules; ++ri) {
    Rule r;
    const std::string nline = detail::next_model_line(in, lineno);
    long long support = 0;
    if (std::sscanf(nline.c_str(), "N=%lld", &support) != 1 || support < 1) {
      throw FormatError("rule " + std::to_string(ri) + ": bad support line '" + nline + "'");
    }
    r.support = support;
    r.center = detail::parse_row(detail::next_model_line(in, lineno), p, lineno);
    r.inv_dispersion.resize(p, p);
    for (int i = 0; i < p; ++i) {
      r.inv_dispersion.row(i) =
          detail::parse_row(detail::next_model_line(in, lineno), p, lineno).transpose();
    }
    r.consequent.resize(p + 1, classes);
    for (int i = 0; i < p + 1; ++i) {
      r.consequent.row(i) =
          detail::parse_row(detail::next_model_line(in, lineno), classes, lineno).transpose();
    }
    r.rls_cov = kDefaultRlsInit * Eigen::MatrixXd::Identity(p + 1, p + 1);
    try {
      validate_rule(r);
    } catch (const std::exception& e) {
      throw FormatError("rule " + std::to_string(ri) + ": " + e.what());
    }
    base.rules.push_back(std::move(r));
  }

  std::string tail;
  while (std::getline(in, tail)) {
    ++lineno;
    if (!detail::trim(tail).empty()) {
      throw FormatError("line " + std::to_string(lineno) + ": trailing content after last rule");
    }
  }
  return base;
}

inline RuleBase load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("load_model: cannot open " + path);
  return load_model(in);
}

/// Evaluate a model over a whole dataset.
inline EvalMetrics evaluate(const RuleBase& base, const Dataset& data) {
  if (data.size() == 0) throw UsageError("evaluate: empty dataset");
  if (data.dim() != base.p) throw UsageError("evaluate: dimension mismatch");
  EvalMetrics m;
  m.confusion = Eigen::MatrixXd::Zero(base.classes, base.classes);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const ClassLabel truth = data.y[i];
    if (truth < 0 || truth >= base.classes) throw UsageError("evaluate: label out of range");
    const Prediction pred = predict(base, data.row(i));
    m.confusion(truth, pred.label) += 1.0;
    ++m.n;
  }
  m.accuracy = m.confusion.trace() / static_cast<double>(m.n);
  return m;
}

/// Default first-rule spread: a tenth of the per-dimension range, floored.
inline Eigen::VectorXd auto_init_spread(const Dataset& data, double fraction = 0.1,
                                        double floor = 1e-3) {
  if (data.size() == 0) throw UsageError("auto_init_spread: empty dataset");
  const Eigen::VectorXd lo = data.x.colwise().minCoeff();
  const Eigen::VectorXd hi = data.x.colwise().maxCoeff();
  return ((hi - lo) * fraction).cwiseMax(floor);
}

}  // namespace panfis
