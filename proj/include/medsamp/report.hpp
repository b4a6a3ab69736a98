#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "medsamp/experiment.hpp"

namespace medsamp {

enum class OutputFormat { csv, json };

inline OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::csv;
  if (s == "json") return OutputFormat::json;
  throw UsageError("unknown format '" + s + "' (expected csv or json)");
}

/// Provenance carried by every output file.
struct OutputHeader {
  std::string version;
  ExperimentConfig config;
};

namespace detail {

inline std::string fmt(Real x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12Lg", x);
  return buf;
}

inline nlohmann::json num(Real x) {
  if (!std::isfinite(x)) return nullptr;
  return static_cast<double>(x);
}

template <class T>
nlohmann::json opt(const std::optional<T>& v) {
  if (!v) return nullptr;
  if constexpr (std::is_floating_point_v<T>)
    return num(*v);
  else
    return *v;
}

inline std::string csv_field(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::string pair_str(const std::optional<std::pair<std::size_t, std::size_t>>& p) {
  if (!p) return "";
  return std::to_string(p->first) + ";" + std::to_string(p->second);
}

inline nlohmann::json pair_json(const std::optional<std::pair<std::size_t, std::size_t>>& p) {
  if (!p) return nullptr;
  return nlohmann::json::array({p->first, p->second});
}

inline nlohmann::json error_json(const RowError& e) {
  if (!e) return nullptr;
  return {{"code", e.code}, {"message", e.message}};
}

inline nlohmann::json envelope(const OutputHeader& h) {
  return {{"tool", "medsamp"},
          {"version", h.version},
          {"config_hash", config_hash(h.config)},
          {"config", to_json(h.config)}};
}

}  // namespace detail

inline void write_csv_header(std::ostream& os, const OutputHeader& h) {
  os << "# medsamp " << h.version << '\n';
  os << "# config_hash " << config_hash(h.config) << '\n';
  os << "# config " << to_json(h.config).dump() << '\n';
}

// ---------------------------------------------------------------------------

inline void write(std::ostream& os, const SweepResult& r, OutputFormat f, const OutputHeader& h) {
  using detail::fmt;
  if (f == OutputFormat::json) {
    auto j = detail::envelope(h);
    j["rows"] = nlohmann::json::array();
    for (const auto& row : r.rows)
      j["rows"].push_back({{"n", row.n},
                           {"noise", row.noise},
                           {"strategy", row.strategy},
                           {"m", row.m},
                           {"efht_iterations", detail::num(row.efht_iterations)},
                           {"log10_efht", detail::num(row.log10_efht)},
                           {"expected_evaluations", detail::num(row.expected_evaluations)},
                           {"log10_evaluations", detail::num(row.log10_evaluations)},
                           {"overflow", row.overflow},
                           {"method", row.method},
                           {"residual", detail::num(row.residual)},
                           {"error", detail::error_json(row.error)}});
    j["slopes"] = nlohmann::json::array();
    for (const auto& s : r.slopes)
      j["slopes"].push_back({{"estimator", s.label}, {"points", s.points}, {"slope", detail::opt(s.slope)}});
    os << j.dump(2) << '\n';
    return;
  }
  write_csv_header(os, h);
  os << "n,noise,strategy,m,efht_iterations,log10_efht,expected_evaluations,log10_evaluations,overflow,method,"
        "residual,error\n";
  for (const auto& row : r.rows) {
    os << row.n << ',' << detail::csv_field(row.noise) << ',' << row.strategy << ',' << row.m << ',';
    if (row.error)
      os << ",,,,,,," << detail::csv_field(row.error.message) << '\n';
    else
      os << fmt(row.efht_iterations) << ',' << fmt(row.log10_efht) << ',' << fmt(row.expected_evaluations) << ','
         << fmt(row.log10_evaluations) << ',' << (row.overflow ? 1 : 0) << ',' << row.method << ','
         << fmt(row.residual) << ",\n";
  }
  for (const auto& s : r.slopes)
    os << "# slope " << detail::csv_field(s.label) << ' ' << (s.slope ? fmt(*s.slope) : std::string("NA"))
       << " points=" << s.points << '\n';
}

inline void write(std::ostream& os, const std::vector<QuantileAudit>& audits, OutputFormat f, const OutputHeader& h) {
  if (f == OutputFormat::json) {
    auto j = detail::envelope(h);
    j["audits"] = nlohmann::json::array();
    for (const auto& a : audits) {
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& r : a.rows)
        rows.push_back({{"i", r.i}, {"true_fitness", r.true_fitness}, {"quantile", r.quantile.str()},
                        {"ambiguous", r.ambiguous}});
      nlohmann::json viol = nlohmann::json::array();
      for (const auto& v : a.violations) viol.push_back({v.first, v.second});
      j["audits"].push_back({{"n", a.n},
                             {"noise", a.noise},
                             {"verdict", a.monotone ? "monotone" : "non-monotone"},
                             {"witness", detail::pair_json(a.witness)},
                             {"violations", viol},
                             {"rows", rows}});
    }
    os << j.dump(2) << '\n';
    return;
  }
  write_csv_header(os, h);
  os << "n,noise,i,true_fitness,two_quantile,ambiguous\n";
  for (const auto& a : audits)
    for (const auto& r : a.rows)
      os << a.n << ',' << detail::csv_field(a.noise) << ',' << r.i << ',' << r.true_fitness << ',' << r.quantile.str()
         << ',' << (r.ambiguous ? 1 : 0) << '\n';
  for (const auto& a : audits) {
    os << "# verdict n=" << a.n << ' ' << (a.monotone ? "monotone" : "non-monotone");
    if (a.witness) os << " witness=(" << a.witness->first << ',' << a.witness->second << ')';
    os << '\n';
  }
}

inline void write(std::ostream& os, const std::vector<AcceptMatrix>& ms, OutputFormat f, const OutputHeader& h) {
  if (f == OutputFormat::json) {
    auto j = detail::envelope(h);
    j["matrices"] = nlohmann::json::array();
    for (const auto& m : ms) {
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& row : m.accept) {
        nlohmann::json r = nlohmann::json::array();
        for (Real x : row) r.push_back(detail::num(x));
        rows.push_back(r);
      }
      j["matrices"].push_back({{"n", m.n}, {"noise", m.noise}, {"estimator", m.estimator}, {"accept", rows},
                               {"error", detail::error_json(m.error)}});
    }
    os << j.dump(2) << '\n';
    return;
  }
  write_csv_header(os, h);
  os << "n,noise,estimator,parent_zeros,offspring_zeros,accept_probability\n";
  for (const auto& m : ms) {
    if (m.error) {
      os << "# error n=" << m.n << ' ' << detail::csv_field(m.estimator) << ": " << m.error.message << '\n';
      continue;
    }
    for (std::size_t i = 0; i < m.accept.size(); ++i)
      for (std::size_t jj = 0; jj < m.accept[i].size(); ++jj)
        os << m.n << ',' << detail::csv_field(m.noise) << ',' << detail::csv_field(m.estimator) << ',' << i << ','
           << jj << ',' << detail::fmt(m.accept[i][jj]) << '\n';
  }
}

inline void write(std::ostream& os, const std::vector<DriftTable>& ts, OutputFormat f, const OutputHeader& h) {
  using detail::fmt;
  if (f == OutputFormat::json) {
    auto j = detail::envelope(h);
    j["tables"] = nlohmann::json::array();
    for (const auto& t : ts) {
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& r : t.rows)
        rows.push_back({{"i", r.i},
                        {"distance", detail::num(r.distance)},
                        {"positive", detail::num(r.positive)},
                        {"negative", detail::num(r.negative)},
                        {"total", detail::num(r.total)},
                        {"direct", detail::num(r.direct)}});
      j["tables"].push_back({{"n", t.n}, {"noise", t.noise}, {"estimator", t.estimator}, {"distance", t.distance},
                             {"rows", rows}, {"error", detail::error_json(t.error)}});
    }
    os << j.dump(2) << '\n';
    return;
  }
  write_csv_header(os, h);
  os << "n,noise,estimator,distance,i,V,drift_positive,drift_negative,drift_total,drift_direct\n";
  for (const auto& t : ts) {
    if (t.error) {
      os << "# error n=" << t.n << ' ' << detail::csv_field(t.estimator) << ": " << t.error.message << '\n';
      continue;
    }
    for (const auto& r : t.rows)
      os << t.n << ',' << detail::csv_field(t.noise) << ',' << detail::csv_field(t.estimator) << ','
         << detail::csv_field(t.distance) << ',' << r.i << ',' << fmt(r.distance) << ',' << fmt(r.positive) << ','
         << fmt(r.negative) << ',' << fmt(r.total) << ',' << fmt(r.direct) << '\n';
  }
}

inline void write(std::ostream& os, const LemmaReport& rep, OutputFormat f, const OutputHeader& h) {
  using detail::fmt;
  if (f == OutputFormat::json) {
    auto j = detail::envelope(h);
    j["rows"] = nlohmann::json::array();
    for (const auto& r : rep.rows)
      j["rows"].push_back({{"n", r.n},
                           {"lemma", r.lemma},
                           {"estimator", r.estimator},
                           {"params", r.params},
                           {"pass", detail::opt(r.pass)},
                           {"witness", detail::pair_json(r.witness)},
                           {"condition", r.condition},
                           {"margin", detail::opt(r.margin)},
                           {"probability", detail::opt(r.probability)},
                           {"bound", detail::opt(r.bound)},
                           {"error", detail::error_json(r.error)}});
    os << j.dump(2) << '\n';
    return;
  }
  write_csv_header(os, h);
  os << "n,lemma,estimator,params,pass,witness,condition,margin,probability,bound,error\n";
  auto o = [](const std::optional<Real>& v) { return v ? fmt(*v) : std::string(); };
  for (const auto& r : rep.rows)
    os << r.n << ',' << r.lemma << ',' << detail::csv_field(r.estimator) << ',' << detail::csv_field(r.params) << ','
       << (r.pass ? (*r.pass ? "1" : "0") : "") << ',' << detail::pair_str(r.witness) << ','
       << detail::csv_field(r.condition) << ',' << o(r.margin) << ',' << o(r.probability) << ',' << o(r.bound) << ','
       << detail::csv_field(r.error.message) << '\n';
}

inline void write(std::ostream& os, const SimulationReport& rep, OutputFormat f, const OutputHeader& h) {
  using detail::fmt;
  if (f == OutputFormat::json) {
    auto j = detail::envelope(h);
    j["cells"] = nlohmann::json::array();
    for (const auto& c : rep.cells) {
      nlohmann::json cell = {{"n", c.n},
                             {"noise", c.noise},
                             {"estimator", c.estimator},
                             {"m", c.m},
                             {"seed", c.seed},
                             {"truncation_dominated", c.truncation_dominated},
                             {"exact_iterations", detail::opt(c.exact_iterations)},
                             {"z_score", detail::opt(c.z_score)},
                             {"error", detail::error_json(c.error)}};
      if (!c.error) cell["summary"] = to_json(c.summary);
      if (!c.exact_note.empty()) cell["exact_note"] = c.exact_note;
      j["cells"].push_back(cell);
    }
    os << j.dump(2) << '\n';
    return;
  }
  write_csv_header(os, h);
  os << "n,noise,estimator,m,seed,replicates,hits,truncated,truncation_dominated,mean_iterations,se_iterations,"
        "median_iterations,q05_iterations,q95_iterations,mean_evaluations,exact_iterations,z_score,error\n";
  auto o = [](const std::optional<Real>& v) { return v ? fmt(*v) : std::string(); };
  for (const auto& c : rep.cells) {
    const auto& s = c.summary;
    os << c.n << ',' << detail::csv_field(c.noise) << ',' << detail::csv_field(c.estimator) << ',' << c.m << ','
       << c.seed << ',' << s.replicates << ',' << s.hits << ',' << s.truncated << ','
       << (c.truncation_dominated ? 1 : 0) << ',' << fmt(s.iterations.mean) << ',' << fmt(s.iterations.standard_error)
       << ',' << fmt(s.iterations.median) << ',' << fmt(s.iterations.q05) << ',' << fmt(s.iterations.q95) << ','
       << fmt(s.evaluations.mean) << ',' << o(c.exact_iterations) << ',' << o(c.z_score) << ','
       << detail::csv_field(c.error.message) << '\n';
  }
}

}  // namespace medsamp
