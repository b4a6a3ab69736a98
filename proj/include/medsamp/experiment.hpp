#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "medsamp/chain.hpp"
#include "medsamp/drift.hpp"
#include "medsamp/efht.hpp"
#include "medsamp/lemmas.hpp"
#include "medsamp/simulator.hpp"

namespace medsamp {

enum class ExperimentKind { efht_sweep, simulate, accept_matrix, drift_table, quantile_audit, lemma_check };

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::efht_sweep: return "efht-sweep";
    case ExperimentKind::simulate: return "simulate";
    case ExperimentKind::accept_matrix: return "accept-matrix";
    case ExperimentKind::drift_table: return "drift-table";
    case ExperimentKind::quantile_audit: return "quantile-audit";
    case ExperimentKind::lemma_check: return "lemma-check";
  }
  return "?";
}

inline ExperimentKind parse_experiment_kind(const std::string& s) {
  for (auto k : {ExperimentKind::efht_sweep, ExperimentKind::simulate, ExperimentKind::accept_matrix,
                 ExperimentKind::drift_table, ExperimentKind::quantile_audit, ExperimentKind::lemma_check})
    if (to_string(k) == s) return k;
  throw UsageError("unknown experiment '" + s + "'");
}

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitCostGuard = 3;
inline constexpr int kExitNumeric = 4;

inline constexpr Real kResidualTolerance = 1e-9L;

struct DistanceSpec {
  DistanceKind kind = DistanceKind::identity;
  Fraction p{0};

  [[nodiscard]] DistanceFunction resolve(std::size_t n) const {
    switch (kind) {
      case DistanceKind::identity: return DistanceFunction::identity(n);
      case DistanceKind::case2: return DistanceFunction::case2(n, p);
      case DistanceKind::case3: return DistanceFunction::case3(n, p);
      case DistanceKind::custom: break;
    }
    throw UsageError("distance: custom tables are not configurable from JSON");
  }
};

/// One entry of a lemma-check experiment. `l` is either a number or "log2n".
struct LemmaCheckSpec {
  std::string lemma;  // "lemma2", "lemma3", "lemma5", "lemma6"
  nlohmann::json l;
  Fraction c{0};
  Fraction p{0};
  Fraction delta{1};
  std::vector<std::size_t> states;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::efht_sweep;
  std::vector<std::size_t> n;
  NoiseModelSpec noise;
  std::vector<EstimatorSpec> estimators{EstimatorSpec{}};
  std::size_t replicates = 1000;
  std::uint64_t seed = 0;
  std::uint64_t budget = kDefaultBudget;
  std::optional<std::size_t> start;
  bool records = false;
  DistanceSpec distance;
  std::vector<LemmaCheckSpec> checks;
};

namespace detail {

inline std::string distance_kind_name(DistanceKind k) {
  switch (k) {
    case DistanceKind::identity: return "identity";
    case DistanceKind::case2: return "case2";
    case DistanceKind::case3: return "case3";
    case DistanceKind::custom: return "custom";
  }
  return "?";
}

inline nlohmann::json fraction_json(const Fraction& f) { return f.str(); }

}  // namespace detail

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["experiment"] = to_string(c.kind);
  j["n"] = c.n;
  j["noise"] = c.noise;
  j["estimators"] = c.estimators;
  j["replicates"] = c.replicates;
  j["seed"] = c.seed;
  j["budget"] = c.budget;
  if (c.start) j["start"] = *c.start;
  j["records"] = c.records;
  j["distance"] = {{"kind", detail::distance_kind_name(c.distance.kind)}, {"p", detail::fraction_json(c.distance.p)}};
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& s : c.checks)
    checks.push_back({{"lemma", s.lemma},
                      {"l", s.l},
                      {"c", detail::fraction_json(s.c)},
                      {"p", detail::fraction_json(s.p)},
                      {"delta", detail::fraction_json(s.delta)},
                      {"states", s.states}});
  j["checks"] = checks;
  return j;
}

inline ExperimentConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw UsageError("config: expected a JSON object");
  ExperimentConfig c;
  try {
    if (!j.contains("experiment")) throw UsageError("config: missing \"experiment\"");
    c.kind = parse_experiment_kind(j.at("experiment").get<std::string>());
    if (!j.contains("n")) throw UsageError("config: missing \"n\"");
    const auto& n = j.at("n");
    if (n.is_array()) {
      for (const auto& v : n) c.n.push_back(v.get<std::size_t>());
    } else {
      c.n.push_back(n.get<std::size_t>());
    }
    if (c.n.empty()) throw UsageError("config: \"n\" is empty");
    for (std::size_t k = 0; k < c.n.size(); ++k) {
      if (c.n[k] < 1) throw UsageError("config: n values must be >= 1");
      if (k && c.n[k] <= c.n[k - 1]) throw UsageError("config: n values must be strictly ascending");
    }
    if (j.contains("noise")) c.noise = j.at("noise").get<NoiseModelSpec>();
    if (j.contains("estimators") && j.contains("estimator"))
      throw UsageError("config: give either \"estimator\" or \"estimators\"");
    if (j.contains("estimators")) {
      c.estimators.clear();
      for (const auto& e : j.at("estimators")) c.estimators.push_back(e.get<EstimatorSpec>());
      if (c.estimators.empty()) throw UsageError("config: \"estimators\" is empty");
    } else if (j.contains("estimator")) {
      c.estimators = {j.at("estimator").get<EstimatorSpec>()};
    }
    c.replicates = j.value("replicates", c.replicates);
    if (c.replicates < 1) throw UsageError("config: replicates must be >= 1");
    c.seed = j.value("seed", c.seed);
    if (j.contains("budget")) {
      const auto& b = j.at("budget");
      c.budget = b.is_number_integer() ? b.get<std::uint64_t>() : static_cast<std::uint64_t>(b.get<double>());
    }
    if (j.contains("start")) c.start = j.at("start").get<std::size_t>();
    c.records = j.value("records", false);
    if (j.contains("distance")) {
      const auto& d = j.at("distance");
      const std::string kind = d.value("kind", "identity");
      if (kind == "identity")
        c.distance.kind = DistanceKind::identity;
      else if (kind == "case2")
        c.distance.kind = DistanceKind::case2;
      else if (kind == "case3")
        c.distance.kind = DistanceKind::case3;
      else
        throw UsageError("config: unknown distance kind '" + kind + "'");
      if (d.contains("p")) c.distance.p = fraction_from_json(d.at("p"), "distance p");
    }
    if (j.contains("checks")) {
      for (const auto& e : j.at("checks")) {
        LemmaCheckSpec s;
        s.lemma = e.at("lemma").get<std::string>();
        if (s.lemma != "lemma2" && s.lemma != "lemma3" && s.lemma != "lemma5" && s.lemma != "lemma6")
          throw UsageError("config: unknown lemma '" + s.lemma + "'");
        s.l = e.value("l", nlohmann::json());
        if (e.contains("c")) s.c = fraction_from_json(e.at("c"), "c");
        if (e.contains("p")) s.p = fraction_from_json(e.at("p"), "p");
        if (e.contains("delta")) s.delta = fraction_from_json(e.at("delta"), "delta");
        if (e.contains("states")) s.states = e.at("states").get<std::vector<std::size_t>>();
        if (e.contains("i")) s.states.push_back(e.at("i").get<std::size_t>());
        c.checks.push_back(std::move(s));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  return c;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string config_hash(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(to_json(c).dump())));
  return buf;
}

/// Error classification shared by every per-row failure.
struct RowError {
  int code = kExitOk;
  std::string message;
  explicit operator bool() const { return code != kExitOk; }
};

namespace detail {

template <class Fn>
RowError guarded(Fn&& fn) {
  try {
    fn();
  } catch (const UsageError& e) {
    return {kExitUsage, e.what()};
  } catch (const InapplicableBound& e) {
    return {kExitUsage, e.what()};
  } catch (const UnsupportedConfiguration& e) {
    return {kExitCostGuard, e.what()};
  } catch (const NumericFailure& e) {
    return {kExitNumeric, e.what()};
  } catch (const StructuralError& e) {
    return {kExitNumeric, e.what()};
  }
  return {};
}

inline int worst(int a, int b) { return std::max(a, b); }

}  // namespace detail

// ---------------------------------------------------------------------------
// efht-sweep

struct SweepRow {
  std::size_t n = 0;
  std::string noise;
  std::string strategy;
  std::size_t estimator_index = 0;
  std::uint64_t m = 0;
  Real efht_iterations = 0.0L;  // Binomial(n, 1/2) start
  Real log10_efht = 0.0L;
  Real expected_evaluations = 0.0L;
  Real log10_evaluations = 0.0L;
  bool overflow = false;
  std::string method;
  Real residual = 0.0L;
  RowError error;
};

struct SlopeFit {
  std::size_t estimator_index = 0;
  std::string label;
  std::size_t points = 0;          // non-overflow rows used
  std::optional<Real> slope;       // present when points >= 3
};

struct SweepResult {
  std::vector<SweepRow> rows;  // ordered by (n, estimator index)
  std::vector<SlopeFit> slopes;
  int exit_code = kExitOk;
};

/// Least-squares slope of log10 y against log10 x.
inline Real loglog_slope(const std::vector<Real>& x, const std::vector<Real>& log10_y) {
  if (x.size() != log10_y.size() || x.size() < 2) throw UsageError("loglog_slope: need >= 2 points");
  const auto k = static_cast<Real>(x.size());
  Real sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += std::log10(x[i]);
    sy += log10_y[i];
  }
  const Real mx = sx / k, my = sy / k;
  Real sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Real dx = std::log10(x[i]) - mx;
    sxy += dx * (log10_y[i] - my);
    sxx += dx * dx;
  }
  if (sxx == 0) throw UsageError("loglog_slope: x values coincide");
  return sxy / sxx;
}

inline std::string estimator_label(const EstimatorSpec& s) {
  std::string out = to_string(s.strategy);
  if (s.preset) out += "(m=" + *s.preset + ")";
  else if (s.m) out += "(m=" + std::to_string(*s.m) + ")";
  return out;
}

inline SweepResult cmd_efht_sweep(const ExperimentConfig& cfg, unsigned threads = 1) {
  const std::size_t E = cfg.estimators.size();
  SweepResult res;
  res.rows.resize(cfg.n.size() * E);
  parallel_for(res.rows.size(), threads, [&](std::size_t cell) {
    SweepRow& row = res.rows[cell];
    row.n = cfg.n[cell / E];
    row.estimator_index = cell % E;
    const EstimatorSpec& es = cfg.estimators[row.estimator_index];
    row.strategy = to_string(es.strategy);
    row.error = detail::guarded([&] {
      const NoiseModel noise = cfg.noise.resolve(row.n);
      row.noise = noise.label();
      const Estimator est = es.resolve(row.n);
      row.m = est.m;
      const auto chain = build_chain<Real>(noise, est);
      const auto v = exact_efht(chain);
      row.method = v.method;
      row.residual = v.residual;
      row.overflow = v.overflow;
      const auto rt = expected_runtime(v, est);
      row.efht_iterations = rt.iterations;
      row.log10_efht = rt.log10_iterations;
      row.expected_evaluations = rt.evaluations;
      row.log10_evaluations = rt.log10_evaluations;
      if (!(v.residual <= kResidualTolerance))
        throw NumericFailure("efht residual " + std::to_string(static_cast<double>(v.residual)) + " above tolerance");
    });
  });
  for (std::size_t e = 0; e < E; ++e) {
    SlopeFit fit{e, estimator_label(cfg.estimators[e]), 0, std::nullopt};
    std::vector<Real> xs, ys;
    for (const auto& r : res.rows)
      if (r.estimator_index == e && !r.error && !r.overflow) {
        xs.push_back(static_cast<Real>(r.n));
        ys.push_back(r.log10_efht);
      }
    fit.points = xs.size();
    if (xs.size() >= 3) fit.slope = loglog_slope(xs, ys);
    res.slopes.push_back(fit);
  }
  for (const auto& r : res.rows) res.exit_code = detail::worst(res.exit_code, r.error.code);
  return res;
}

// ---------------------------------------------------------------------------
// quantile-audit

struct QuantileRow {
  std::size_t i = 0;
  std::int64_t true_fitness = 0;
  Value quantile;
  bool ambiguous = false;
};

struct QuantileAudit {
  std::size_t n = 0;
  std::string noise;
  std::vector<QuantileRow> rows;
  bool monotone = true;  // 2-quantile strictly decreasing in i
  // Adjacent pairs (i, i+1) whose 2-quantile does not decrease; the witness is the largest reversal,
  // ties going to the larger state.
  std::vector<std::pair<std::size_t, std::size_t>> violations;
  std::optional<std::pair<std::size_t, std::size_t>> witness;
};

inline QuantileAudit quantile_audit(const NoiseModel& noise) {
  QuantileAudit a;
  a.n = noise.n;
  a.noise = noise.label();
  for (std::size_t i = 0; i <= noise.n; ++i) {
    const auto q = two_quantile(noise_pmf<Exact>(noise, i));
    a.rows.push_back({i, static_cast<std::int64_t>(noise.n - i), q.value, q.ambiguous});
  }
  Value worst_gap;
  for (std::size_t i = 0; i + 1 < a.rows.size(); ++i) {
    if (a.rows[i + 1].quantile < a.rows[i].quantile) continue;
    a.violations.emplace_back(i, i + 1);
    const Value gap = a.rows[i + 1].quantile - a.rows[i].quantile;
    if (!a.witness || gap >= worst_gap) {
      a.witness = std::make_pair(i, i + 1);
      worst_gap = gap;
    }
  }
  a.monotone = a.violations.empty();
  return a;
}

inline std::vector<QuantileAudit> cmd_quantile_audit(const ExperimentConfig& cfg) {
  std::vector<QuantileAudit> out;
  for (std::size_t n : cfg.n) out.push_back(quantile_audit(cfg.noise.resolve(n)));
  return out;
}

// ---------------------------------------------------------------------------
// accept-matrix and drift-table

struct AcceptMatrix {
  std::size_t n = 0;
  std::string noise, estimator;
  std::vector<std::vector<Real>> accept;  // accept[i][j] = A[i][j]
  RowError error;
};

inline std::vector<AcceptMatrix> cmd_accept_matrix(const ExperimentConfig& cfg, unsigned threads = 1) {
  const std::size_t E = cfg.estimators.size();
  std::vector<AcceptMatrix> out(cfg.n.size() * E);
  for (std::size_t cell = 0; cell < out.size(); ++cell) {
    auto& a = out[cell];
    a.n = cfg.n[cell / E];
    a.estimator = estimator_label(cfg.estimators[cell % E]);
    a.error = detail::guarded([&] {
      const auto chain = build_chain<Real>(a.n, cfg.noise, cfg.estimators[cell % E], threads);
      a.noise = chain.noise.label();
      a.accept.assign(a.n + 1, std::vector<Real>(a.n + 1));
      for (std::size_t i = 0; i <= a.n; ++i)
        for (std::size_t j = 0; j <= a.n; ++j) a.accept[i][j] = chain.accept(i, j);
    });
  }
  return out;
}

struct DriftRow {
  std::size_t i = 0;
  Real distance = 0.0L;
  Real positive = 0.0L, negative = 0.0L, total = 0.0L, direct = 0.0L;
};

struct DriftTable {
  std::size_t n = 0;
  std::string noise, estimator, distance;
  std::vector<DriftRow> rows;  // states 1..n
  RowError error;
};

inline std::vector<DriftTable> cmd_drift_table(const ExperimentConfig& cfg, unsigned threads = 1) {
  const std::size_t E = cfg.estimators.size();
  std::vector<DriftTable> out(cfg.n.size() * E);
  for (std::size_t cell = 0; cell < out.size(); ++cell) {
    auto& t = out[cell];
    t.n = cfg.n[cell / E];
    t.estimator = estimator_label(cfg.estimators[cell % E]);
    t.error = detail::guarded([&] {
      const auto df = cfg.distance.resolve(t.n);
      t.distance = df.label();
      const auto chain = build_chain<Real>(t.n, cfg.noise, cfg.estimators[cell % E], threads);
      t.noise = chain.noise.label();
      for (std::size_t i = 1; i <= t.n; ++i) {
        const auto d = drift(chain, df, i);
        t.rows.push_back({i, df(i).to_real(), d.positive, d.negative, d.total, d.direct});
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// lemma-check

struct LemmaRow {
  std::size_t n = 0;
  std::string lemma;
  std::string params;
  std::string estimator;
  std::optional<bool> pass;
  std::optional<std::pair<std::size_t, std::size_t>> witness;
  std::string condition;
  std::optional<Real> margin;
  std::optional<Real> probability;  // lemma2 / lemma6
  std::optional<Real> bound;        // lemma2
  RowError error;
};

struct LemmaReport {
  std::vector<LemmaRow> rows;
  int exit_code = kExitOk;
};

namespace detail {

inline Real resolve_l(const nlohmann::json& l, std::size_t n) {
  if (l.is_string() && l.get<std::string>() == "log2n") return std::log2(static_cast<Real>(n));
  if (l.is_number()) return l.get<Real>();
  throw UsageError("lemma check: \"l\" must be a number or \"log2n\"");
}

}  // namespace detail

inline LemmaReport cmd_lemma_check(const ExperimentConfig& cfg, unsigned threads = 1) {
  LemmaReport rep;
  for (std::size_t n : cfg.n) {
    for (const auto& es : cfg.estimators) {
      std::optional<LumpedChain<Real>> chain;
      auto get_chain = [&]() -> const LumpedChain<Real>& {
        if (!chain) chain = build_chain<Real>(n, cfg.noise, es, threads);
        return *chain;
      };
      for (const auto& spec : cfg.checks) {
        auto base = [&] {
          LemmaRow r;
          r.n = n;
          r.lemma = spec.lemma;
          r.estimator = estimator_label(es);
          return r;
        };
        if (spec.lemma == "lemma2" || spec.lemma == "lemma6") {
          std::vector<std::size_t> states = spec.states;
          if (states.empty()) states.push_back(n / 2);
          for (std::size_t i : states) {
            LemmaRow r = base();
            r.params = "i=" + std::to_string(i);
            std::vector<LemmaRow> extra;
            r.error = detail::guarded([&] {
              const Estimator est = es.resolve(n);
              if (spec.lemma == "lemma2") {
                r.params += " p=" + spec.p.str() + " delta=" + spec.delta.str() + " m=" + std::to_string(est.m);
                const auto c = lemma2_verify(n, spec.p, i, est.m, spec.delta);
                if (!c.applicable()) {
                  r.condition = "no applicable case";
                  return;
                }
                for (std::size_t k = 0; k < c.cases.size(); ++k) {
                  LemmaRow cr = r;
                  cr.condition = "case " + c.cases[k].label + ": " + c.cases[k].event;
                  cr.probability = c.cases[k].probability;
                  cr.bound = c.cases[k].bound;
                  cr.pass = c.cases[k].probability >= c.cases[k].bound;
                  if (k == 0)
                    r = cr;
                  else
                    extra.push_back(cr);
                }
              } else {
                const NoiseModel noise = cfg.noise.resolve(n);
                if (noise.kind != NoiseKind::segmented) throw UsageError("lemma6 requires segmented noise");
                r.params += " m=" + std::to_string(est.m);
                const auto s = lemma6_verify(n, noise.theta1, noise.theta2, i, est.m);
                r.condition = "segment " + s.segment + ": f = " + s.majority.str();
                r.probability = s.probability;
              }
            });
            rep.rows.push_back(r);
            for (auto& e : extra) rep.rows.push_back(std::move(e));
          }
          continue;
        }
        LemmaRow r = base();
        r.error = detail::guarded([&] {
          const Real l = detail::resolve_l(spec.l, n);
          char buf[64];
          std::snprintf(buf, sizeof buf, "l=%.6Lg c=", l);
          r.params = buf + spec.c.str();
          ConditionCheck chk;
          if (spec.lemma == "lemma3") {
            chk = lemma3_check(get_chain(), l, spec.c);
          } else {
            if (l != std::floor(l) || l < 0) throw UsageError("lemma5_check: l must be a nonnegative integer");
            chk = lemma5_check(get_chain(), static_cast<std::size_t>(l), spec.c);
          }
          r.pass = chk.pass;
          r.witness = chk.witness;
          r.condition = chk.condition;
          r.margin = chk.margin;
        });
        rep.rows.push_back(r);
      }
    }
  }
  for (const auto& r : rep.rows) rep.exit_code = detail::worst(rep.exit_code, r.error.code);
  return rep;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulationCell {
  std::size_t n = 0;
  std::string noise, estimator;
  std::uint64_t m = 0;
  std::uint64_t seed = 0;
  RunSummary summary;
  bool truncation_dominated = false;  // more than half of the runs hit the budget
  std::optional<Real> exact_iterations;
  std::optional<Real> z_score;
  std::string exact_note;
  RowError error;
};

struct SimulationReport {
  std::vector<SimulationCell> cells;
  int exit_code = kExitOk;
};

/// Cell k runs with master seed derive_seed(cfg.seed, k).
inline SimulationReport cmd_simulate(const ExperimentConfig& cfg, unsigned threads = 1) {
  const std::size_t E = cfg.estimators.size();
  SimulationReport rep;
  rep.cells.resize(cfg.n.size() * E);
  for (std::size_t cell = 0; cell < rep.cells.size(); ++cell) {
    auto& c = rep.cells[cell];
    c.n = cfg.n[cell / E];
    const auto& es = cfg.estimators[cell % E];
    c.estimator = estimator_label(es);
    c.seed = derive_seed(cfg.seed, cell);
    RunConfig rc;
    rc.n = c.n;
    rc.noise = cfg.noise;
    rc.estimator = es;
    rc.max_evaluations = cfg.budget;
    rc.seed = c.seed;
    rc.start_zeros = cfg.start;
    c.error = detail::guarded([&] {
      const NoiseModel noise = cfg.noise.resolve(c.n);
      c.noise = noise.label();
      c.m = es.resolve(c.n).m;
      c.summary = run_many(rc, cfg.replicates, threads);
      c.truncation_dominated = 2 * c.summary.truncated > c.summary.replicates;
    });
    if (c.error) continue;
    const RowError exact = detail::guarded([&] {
      const auto chain = build_chain<Real>(c.n, cfg.noise, es, threads);
      const auto v = exact_efht(chain);
      const Real e = cfg.start ? v.iterations[*cfg.start] : expected_runtime(v, chain.estimator).iterations;
      c.exact_iterations = e;
      if (c.summary.hits > 1 && c.summary.iterations.standard_error > 0)
        c.z_score = (c.summary.iterations.mean - e) / c.summary.iterations.standard_error;
    });
    if (exact) c.exact_note = exact.message;
  }
  for (const auto& c : rep.cells) rep.exit_code = detail::worst(rep.exit_code, c.error.code);
  return rep;
}

}  // namespace medsamp
