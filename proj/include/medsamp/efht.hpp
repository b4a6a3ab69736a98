#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "medsamp/chain.hpp"

namespace medsamp {

/// Above this many iterations an EFHT entry is flagged as effectively exponential.
inline constexpr Real kOverflowThreshold = 1e15L;

/// Nonnegative reals stored as natural logarithms; enough for subtraction-free elimination.
struct LogReal {
  Real lg = -std::numeric_limits<Real>::infinity();

  static LogReal from(Real x) { return {x > 0 ? std::log(x) : -std::numeric_limits<Real>::infinity()}; }
  [[nodiscard]] bool is_zero() const { return std::isinf(lg) && lg < 0; }
  [[nodiscard]] Real log10() const { return lg / std::numbers::ln10_v<Real>; }

  friend LogReal operator+(LogReal a, LogReal b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.lg < b.lg) std::swap(a, b);
    return {a.lg + std::log1p(std::exp(b.lg - a.lg))};
  }
  friend LogReal operator*(LogReal a, LogReal b) {
    if (a.is_zero() || b.is_zero()) return {};
    return {a.lg + b.lg};
  }
  friend LogReal operator/(LogReal a, LogReal b) { return {a.lg - b.lg}; }
  LogReal& operator+=(LogReal b) { return *this = *this + b; }
};

struct EFHTVector {
  std::vector<Real> iterations;  // E[i]; +inf once beyond long double range
  std::vector<Real> log10;       // log10 E[i]; -inf at the optimum
  Real residual = 0.0L;          // componentwise relative residual of the scaled solution
  bool overflow = false;         // some E[i] > 1e15
  std::string method;            // "real", "log" or "exact"

  [[nodiscard]] std::size_t states() const { return iterations.size(); }
  [[nodiscard]] Real max_log10() const { return *std::max_element(log10.begin(), log10.end()); }
};

namespace detail {

inline bool is_zero_scalar(const Real& x) { return x == 0.0L; }
inline bool is_zero_scalar(const Exact& x) { return sgn(x) == 0; }
inline bool is_zero_scalar(const LogReal& x) { return x.is_zero(); }

/*
 * Grassmann-Taksar-Heyman style elimination for E = 1 + T E, E[0] = 0.
 * States are removed from n down to 1; each removal folds the paths through
 * that state into the remaining rows. No subtractions occur.
 */
template <class S, Probability P, class Convert>
std::vector<S> gth_efht(const LumpedChain<P>& c, Convert convert) {
  const std::size_t n = c.n;
  Matrix<S> q(n + 1, S{});
  std::vector<S> exit(n + 1), b(n + 1), d(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    exit[i] = convert(c.transition(i, 0));
    b[i] = convert(from_int<P>(1));
    for (std::size_t j = 1; j <= n; ++j)
      if (j != i) q(i, j) = convert(c.transition(i, j));
  }
  for (std::size_t k = n; k >= 1; --k) {
    S dk = exit[k];
    for (std::size_t j = 1; j < k; ++j) dk += q(k, j);
    if (is_zero_scalar(dk))
      throw StructuralError("efht: state " + std::to_string(k) +
                            " cannot reach the optimum (no outflow after elimination)");
    d[k] = dk;
    for (std::size_t i = 1; i < k; ++i) {
      if (is_zero_scalar(q(i, k))) continue;
      const S f = q(i, k) / dk;
      for (std::size_t j = 1; j < k; ++j)
        if (j != i && !is_zero_scalar(q(k, j))) q(i, j) += f * q(k, j);
      if (!is_zero_scalar(exit[k])) exit[i] += f * exit[k];
      b[i] += f * b[k];
    }
  }
  std::vector<S> E(n + 1);
  E[0] = convert(from_int<P>(0));
  for (std::size_t k = 1; k <= n; ++k) {
    S acc = b[k];
    for (std::size_t j = 1; j < k; ++j)
      if (!is_zero_scalar(q(k, j))) acc += q(k, j) * E[j];
    E[k] = acc / d[k];
  }
  return E;
}

// max_i |sum_j T_ij (E_i - E_j) - s| / (sum_j T_ij (E_i + E_j) + s) on E scaled by 1/Emax, s = 1/Emax.
template <Probability P>
Real scaled_residual(const LumpedChain<P>& c, const std::vector<Real>& log_e) {
  const std::size_t n = c.n;
  const Real top = *std::max_element(log_e.begin(), log_e.end());
  std::vector<Real> e(n + 1);
  for (std::size_t i = 0; i <= n; ++i) e[i] = i == 0 ? 0.0L : std::exp(log_e[i] - top);
  const Real s = std::exp(-top);
  Real worst = 0.0L;
  for (std::size_t i = 1; i <= n; ++i) {
    CompensatedSum num;
    CompensatedSum den;
    num.add(-s);
    den.add(s);
    for (std::size_t j = 0; j <= n; ++j) {
      if (j == i) continue;
      const Real t = to_real(c.transition(i, j));
      num.add(t * e[i] - t * e[j]);
      den.add(t * (e[i] + e[j]));
    }
    if (den.value() > 0) worst = std::max(worst, std::fabs(num.value()) / den.value());
  }
  return worst;
}

inline void finish_flags(EFHTVector& v) {
  v.overflow = std::any_of(v.log10.begin(), v.log10.end(), [](Real l) { return l > 15.0L; });
}

}  // namespace detail

/// Exact rational EFHT of an exact chain.
inline std::vector<Exact> efht_rational(const LumpedChain<Exact>& c) {
  return detail::gth_efht<Exact>(c, [](const Exact& x) { return x; });
}

/// Solves the hitting-time system; falls back to log-domain elimination when long double overflows.
inline EFHTVector exact_efht(const LumpedChain<Real>& c) {
  EFHTVector v;
  const std::size_t n = c.n;
  std::vector<Real> log_e(n + 1, -std::numeric_limits<Real>::infinity());
  const auto E = detail::gth_efht<Real>(c, [](Real x) { return x; });
  const bool finite = std::all_of(E.begin(), E.end(), [](Real x) { return std::isfinite(x) && x >= 0; });
  if (finite) {
    v.method = "real";
    v.iterations = E;
    for (std::size_t i = 1; i <= n; ++i) log_e[i] = std::log(E[i]);
  } else {
    v.method = "log";
    const auto L = detail::gth_efht<LogReal>(c, [](Real x) { return LogReal::from(x); });
    v.iterations.assign(n + 1, 0.0L);
    for (std::size_t i = 1; i <= n; ++i) {
      log_e[i] = L[i].lg;
      v.iterations[i] = std::exp(L[i].lg);
    }
  }
  v.log10.resize(n + 1);
  for (std::size_t i = 0; i <= n; ++i) v.log10[i] = log_e[i] / std::numbers::ln10_v<Real>;
  v.residual = n ? detail::scaled_residual(c, log_e) : 0.0L;
  detail::finish_flags(v);
  return v;
}

inline EFHTVector exact_efht(const LumpedChain<Exact>& c) {
  const auto E = efht_rational(c);
  EFHTVector v;
  v.method = "exact";
  v.iterations.resize(E.size());
  v.log10.resize(E.size());
  for (std::size_t i = 0; i < E.size(); ++i) {
    v.iterations[i] = to_real(E[i]);
    v.log10[i] = i == 0 ? -std::numeric_limits<Real>::infinity() : std::log10(v.iterations[i]);
  }
  // Exact solution: verify the system holds identically.
  for (std::size_t i = 1; i < E.size(); ++i) {
    Exact rhs = 1;
    for (std::size_t j = 0; j < E.size(); ++j) rhs += c.transition(i, j) * E[j];
    if (rhs != E[i]) throw NumericFailure("efht: exact solution fails the hitting-time system");
  }
  v.residual = 0.0L;
  detail::finish_flags(v);
  return v;
}

/// Binomial(n, 1/2) over zero counts, the image of uniform bit strings.
template <Probability P>
std::vector<P> binomial_initial(std::size_t n) {
  std::vector<P> w(n + 1);
  if constexpr (is_exact_v<P>) {
    mpz_class denom;
    mpz_ui_pow_ui(denom.get_mpz_t(), 2, n);
    const auto row = detail::binomial_row(n);
    for (std::size_t i = 0; i <= n; ++i) {
      w[i] = Exact(row[i], denom);
      w[i].canonicalize();
    }
  } else {
    for (std::size_t i = 0; i <= n; ++i) w[i] = std::exp(log_binomial_pmf(n, i, 0.5L));
  }
  return w;
}

/// Point mass at one zero count.
inline std::vector<Real> fixed_initial(std::size_t n, std::size_t state) {
  if (state > n) throw UsageError("fixed_initial: state exceeds n");
  std::vector<Real> w(n + 1, 0.0L);
  w[state] = 1.0L;
  return w;
}

struct RuntimeEstimate {
  Real iterations = 0.0L;         // E(tau | xi_0 ~ initial)
  Real evaluations = 0.0L;        // m + 2m E(tau)
  Real log10_iterations = 0.0L;
  Real log10_evaluations = 0.0L;
};

/// m + 2m E(tau) evaluations for a given mean hitting time.
inline Real evaluations_for(Real mean_iterations, std::uint64_t m) {
  const auto M = static_cast<Real>(m);
  return M + 2.0L * M * mean_iterations;
}

inline RuntimeEstimate expected_runtime(const EFHTVector& efht, const Estimator& est, const std::vector<Real>& initial) {
  if (initial.size() != efht.states()) throw UsageError("expected_runtime: initial law has wrong length");
  Real total = 0.0L;
  for (Real w : initial) {
    if (w < 0) throw UsageError("expected_runtime: negative initial weight");
    total += w;
  }
  if (std::fabs(total - 1.0L) > 1e-12L) throw UsageError("expected_runtime: initial law not normalized");
  // log-sum-exp over the weighted entries so exponential regimes stay finite in log scale.
  const Real ln10 = std::numbers::ln10_v<Real>;
  Real top = -std::numeric_limits<Real>::infinity();
  for (std::size_t i = 0; i < initial.size(); ++i)
    if (initial[i] > 0) top = std::max(top, std::log(initial[i]) + efht.log10[i] * ln10);
  RuntimeEstimate r;
  if (std::isinf(top)) {
    r.iterations = 0.0L;
    r.log10_iterations = -std::numeric_limits<Real>::infinity();
  } else {
    CompensatedSum s;
    for (std::size_t i = 0; i < initial.size(); ++i)
      if (initial[i] > 0) s.add(std::exp(std::log(initial[i]) + efht.log10[i] * ln10 - top));
    const Real ln_iter = top + std::log(s.value());
    r.iterations = std::exp(ln_iter);
    r.log10_iterations = ln_iter / ln10;
  }
  const auto M = static_cast<Real>(est.m);
  r.evaluations = evaluations_for(r.iterations, est.m);
  // log10(m (1 + 2 E)) without forming E when it overflows.
  if (std::isfinite(r.iterations))
    r.log10_evaluations = std::log10(r.evaluations);
  else
    r.log10_evaluations = std::log10(2.0L * M) + r.log10_iterations;
  return r;
}

inline RuntimeEstimate expected_runtime(const EFHTVector& efht, const Estimator& est) {
  return expected_runtime(efht, est, binomial_initial<Real>(efht.states() - 1));
}

inline nlohmann::json to_json(const EFHTVector& v) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < v.states(); ++i)
    rows.push_back({{"state", i},
                    {"efht_iterations", std::isfinite(v.iterations[i]) ? nlohmann::json(static_cast<double>(v.iterations[i]))
                                                                       : nlohmann::json(nullptr)},
                    {"log10_efht", i == 0 ? nlohmann::json(nullptr) : nlohmann::json(static_cast<double>(v.log10[i]))}});
  return {{"method", v.method}, {"residual", static_cast<double>(v.residual)}, {"overflow", v.overflow}, {"rows", rows}};
}

/// CSV columns: state, efht_iterations, overflow_flag, log10_efht.
inline void write_csv(std::ostream& os, const EFHTVector& v) {
  os << "state,efht_iterations,overflow_flag,log10_efht\n";
  char buf[128];
  for (std::size_t i = 0; i < v.states(); ++i) {
    const bool big = v.log10[i] > 15.0L;
    std::snprintf(buf, sizeof buf, "%zu,%.17Lg,%d,%.12Lg\n", i, v.iterations[i], big ? 1 : 0,
                  i == 0 ? 0.0L : v.log10[i]);
    os << buf;
  }
}

}  // namespace medsamp
