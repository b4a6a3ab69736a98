#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "medsamp/binomial.hpp"
#include "medsamp/distribution.hpp"
#include "medsamp/errors.hpp"
#include "medsamp/noise.hpp"

namespace medsamp {

enum class Strategy { raw, mean, median };

inline std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::raw: return "raw";
    case Strategy::mean: return "mean";
    case Strategy::median: return "median";
  }
  return "?";
}

inline Strategy parse_strategy(const std::string& s) {
  if (s == "raw") return Strategy::raw;
  if (s == "mean") return Strategy::mean;
  if (s == "median") return Strategy::median;
  throw UsageError("unknown strategy '" + s + "'");
}

/// A sampling strategy with a concrete sample size.
struct Estimator {
  Strategy strategy = Strategy::raw;
  std::uint64_t m = 1;

  static Estimator raw() { return {}; }
  static Estimator mean(std::uint64_t m) { return make(Strategy::mean, m); }
  static Estimator median(std::uint64_t m) { return make(Strategy::median, m); }
  static Estimator make(Strategy s, std::uint64_t m) {
    if (m == 0) throw UsageError("estimator: sample size m must be >= 1");
    if (s == Strategy::raw && m != 1) throw UsageError("estimator: raw evaluation implies m = 1");
    return {s, m};
  }

  [[nodiscard]] std::string label() const {
    return strategy == Strategy::raw ? "raw" : to_string(strategy) + "(m=" + std::to_string(m) + ")";
  }
  friend bool operator==(const Estimator&, const Estimator&) = default;
};

/// Named sample sizes: "2n3+1" (median, one-bit/segmented), "n3" (mean, partial), "4n3" (mean, one-bit).
inline std::uint64_t preset_sample_size(const std::string& preset, std::uint64_t n) {
  const std::uint64_t cube = n * n * n;
  if (preset == "2n3+1") return 2 * cube + 1;
  if (preset == "4n3") return 4 * cube;
  if (preset == "n3") return cube;
  throw UsageError("unknown sample-size preset '" + preset + "'");
}

/// Strategy plus either a fixed m or a preset expanded against n.
struct EstimatorSpec {
  Strategy strategy = Strategy::raw;
  std::optional<std::uint64_t> m;
  std::optional<std::string> preset;

  static EstimatorSpec fixed(Strategy s, std::uint64_t m) { return {s, m, std::nullopt}; }
  static EstimatorSpec with_preset(Strategy s, std::string p) { return {s, std::nullopt, std::move(p)}; }

  [[nodiscard]] Estimator resolve(std::uint64_t n) const {
    if (strategy == Strategy::raw) {
      if ((m && *m != 1) || preset) throw UsageError("estimator: raw evaluation implies m = 1");
      return Estimator::raw();
    }
    if (preset) return Estimator::make(strategy, preset_sample_size(*preset, n));
    if (!m) throw UsageError("estimator: need \"m\" or \"preset\"");
    return Estimator::make(strategy, *m);
  }
};

inline void to_json(nlohmann::json& j, const EstimatorSpec& s) {
  j = nlohmann::json{{"strategy", to_string(s.strategy)}};
  if (s.preset) j["preset"] = *s.preset;
  else if (s.m) j["m"] = *s.m;
}

inline void from_json(const nlohmann::json& j, EstimatorSpec& s) {
  if (!j.is_object() || !j.contains("strategy")) throw UsageError("estimator spec: expected object with \"strategy\"");
  s = EstimatorSpec{};
  s.strategy = parse_strategy(j.at("strategy").get<std::string>());
  if (j.contains("preset")) {
    s.preset = j.at("preset").get<std::string>();
    preset_sample_size(*s.preset, 1);  // validates the name
  }
  if (j.contains("m")) {
    const auto m = j.at("m").get<std::int64_t>();
    if (m < 1) throw UsageError("estimator: m must be >= 1");
    s.m = static_cast<std::uint64_t>(m);
  }
  if (s.strategy == Strategy::raw && ((s.m && *s.m != 1) || s.preset))
    throw UsageError("estimator: raw evaluation implies m = 1");
  if (s.strategy != Strategy::raw && !s.m && !s.preset) throw UsageError("estimator: need \"m\" or \"preset\"");
}

// ---------------------------------------------------------------------------
// Sample-based estimates.

inline Value mean_estimate(std::span<const Value> samples) {
  if (samples.empty()) throw UsageError("mean_estimate: empty sample");
  const auto count = static_cast<std::int64_t>(samples.size());
  if (std::all_of(samples.begin(), samples.end(), [](const Value& v) { return v.is_integer(); })) {
    __int128 sum = 0;
    for (const auto& v : samples) sum += v.num();
    if (sum > INT64_MAX || sum < INT64_MIN) throw std::overflow_error("mean_estimate: sum exceeds 64 bits");
    return Value(static_cast<std::int64_t>(sum), count);
  }
  Value sum(0);
  for (const auto& v : samples) sum += v;
  return sum / Value(count);
}

/// Reorders `samples` in place.
inline Value median_estimate_inplace(std::span<Value> samples) {
  if (samples.empty()) throw UsageError("median_estimate: empty sample");
  const std::size_t m = samples.size();
  const auto mid = samples.begin() + static_cast<std::ptrdiff_t>((m - 1) / 2);
  std::nth_element(samples.begin(), mid, samples.end());
  if (m % 2 == 1) return *mid;
  const Value upper = *std::min_element(mid + 1, samples.end());
  return (*mid + upper) / Value(2);
}

inline Value median_estimate(std::span<const Value> samples) {
  std::vector<Value> copy(samples.begin(), samples.end());
  return median_estimate_inplace(copy);
}

// ---------------------------------------------------------------------------
// Exact laws of the estimators.

/// Exact transforms refuse k * m^2 above this (k = support size) for k >= 3 means and even-m medians.
inline constexpr long double kEnumerationBudget = 1e8L;
/// Largest m handled with exact rational probabilities.
inline constexpr std::uint64_t kExactSampleLimit = 10001;
/// Even-m median laws are computed for supports up to this size.
inline constexpr std::size_t kEvenMedianSupportLimit = 8;

namespace detail {

template <Probability P>
void check_exact_limit(std::uint64_t m, const char* what) {
  if constexpr (is_exact_v<P>) {
    if (m > kExactSampleLimit)
      throw UnsupportedConfiguration(std::string(what) + ": m = " + std::to_string(m) +
                                     " exceeds the exact-rational limit; use Real probabilities");
  }
}

inline void check_enumeration_budget(std::size_t k, std::uint64_t m, const char* what) {
  const long double cost = static_cast<long double>(k) * static_cast<long double>(m) * static_cast<long double>(m);
  if (cost > kEnumerationBudget)
    throw UnsupportedConfiguration(std::string(what) + ": k*m^2 = " + std::to_string(static_cast<double>(cost)) +
                                   " exceeds the 1e8 enumeration budget; use Monte Carlo estimates");
}

// Odd m: P(median <= v_t) = P(Bin(m, F_t) >= h), h = (m+1)/2.
template <Probability P>
DiscreteDistribution<P> median_odd(const DiscreteDistribution<P>& d, std::uint64_t m) {
  const std::uint64_t h = (m + 1) / 2;
  const auto& atoms = d.atoms();
  const std::size_t k = atoms.size();
  std::vector<Atom<P>> out;
  out.reserve(k);
  if constexpr (is_exact_v<P>) {
    Exact cum = 0;
    Exact prev_tail = 0;
    for (std::size_t t = 0; t < k; ++t) {
      cum += atoms[t].prob;
      const Exact tail = t + 1 == k ? d.total() : binomial_upper_tail_exact(m, h, cum);
      out.push_back({atoms[t].value, Exact(tail - prev_tail)});
      prev_tail = tail;
    }
  } else {
    // Cumulative from below and from above, so neither side is formed by subtraction.
    std::vector<Real> below(k), above(k);
    Real run = 0.0L;
    for (std::size_t t = 0; t < k; ++t) below[t] = (run += atoms[t].prob);
    run = 0.0L;
    for (std::size_t t = k; t-- > 0;) above[t] = (run += atoms[t].prob);
    auto tail = [&](Real x) { return binomial_upper_tail(m, h, x); };
    for (std::size_t t = 0; t < k; ++t) {
      const Real below_prev = t ? below[t - 1] : 0.0L;
      const Real above_next = t + 1 < k ? above[t + 1] : 0.0L;
      Real mass;
      if (below[t] <= 0.5L) {
        mass = tail(below[t]) - tail(below_prev);
      } else if (below_prev >= 0.5L) {
        mass = tail(above[t]) - tail(above_next);
      } else {
        mass = 1.0L - tail(below_prev) - tail(above_next);
      }
      out.push_back({atoms[t].value, std::max(mass, 0.0L)});
    }
  }
  return DiscreteDistribution<P>::from_sorted(std::move(out));
}

// log(x^h - y^h) for 0 <= y < x.
inline Real log_pow_diff(Real x, Real y, std::uint64_t h) {
  const Real H = static_cast<Real>(h);
  if (y <= 0.0L) return H * std::log(x);
  return H * std::log(x) + std::log(-std::expm1(H * std::log1p(-(x - y) / x)));
}

// Even m = 2h: joint law of the h-th and (h+1)-th order statistics.
template <Probability P>
DiscreteDistribution<P> median_even(const DiscreteDistribution<P>& d, std::uint64_t m) {
  const std::uint64_t h = m / 2;
  const auto& atoms = d.atoms();
  const std::size_t k = atoms.size();
  std::vector<P> below(k), above(k);  // P(X <= v_t), P(X >= v_t)
  {
    P run = from_int<P>(0);
    for (std::size_t t = 0; t < k; ++t) below[t] = (run += atoms[t].prob);
    run = from_int<P>(0);
    for (std::size_t t = k; t-- > 0;) above[t] = (run += atoms[t].prob);
  }
  const P zero = from_int<P>(0);
  auto below_at = [&](std::size_t t, bool strict) -> P { return strict ? (t ? below[t - 1] : zero) : below[t]; };
  auto above_at = [&](std::size_t t, bool strict) -> P { return strict ? (t + 1 < k ? above[t + 1] : zero) : above[t]; };

  std::vector<Atom<P>> out;
  if constexpr (is_exact_v<P>) {
    mpz_class choose;
    mpz_bin_uiui(choose.get_mpz_t(), m, h);
    auto pw = [](const Exact& x, std::uint64_t e) {
      mpz_class num, den;
      mpz_pow_ui(num.get_mpz_t(), x.get_num_mpz_t(), e);
      mpz_pow_ui(den.get_mpz_t(), x.get_den_mpz_t(), e);
      return Exact(num, den);
    };
    std::vector<mpz_class> fact(m + 1);
    fact[0] = 1;
    for (std::uint64_t t = 1; t <= m; ++t) fact[t] = fact[t - 1] * static_cast<unsigned long>(t);
    for (std::size_t s = 0; s < k; ++s) {
      const Exact lo = pw(below_at(s, false), h) - pw(below_at(s, true), h);
      for (std::size_t t = s + 1; t < k; ++t) {
        const Exact hi = pw(above_at(t, false), h) - pw(above_at(t, true), h);
        out.push_back({(atoms[s].value + atoms[t].value) / Value(2), Exact(Exact(choose) * lo * hi)});
      }
      // Both middle order statistics equal v_s: fewer than h samples strictly on each side.
      const Exact& under = below_at(s, true);
      const Exact& over = above_at(s, true);
      const Exact& at = atoms[s].prob;
      Exact diag = 0;
      for (std::uint64_t a = 0; a < h; ++a) {
        if (a > 0 && under == 0) break;
        for (std::uint64_t b = 0; b < h; ++b) {
          if (b > 0 && over == 0) break;
          const mpz_class coef = fact[m] / (fact[a] * fact[b] * fact[m - a - b]);
          diag += Exact(coef) * pw(under, a) * pw(over, b) * pw(at, m - a - b);
        }
      }
      out.push_back({atoms[s].value, diag});
    }
  } else {
    const auto lf = log_factorials(m);
    const Real log_choose = lf[m] - 2.0L * lf[h];
    for (std::size_t s = 0; s < k; ++s) {
      const Real lo = log_pow_diff(below[s], below_at(s, true), h);
      for (std::size_t t = s + 1; t < k; ++t) {
        const Real hi = log_pow_diff(above[t], above_at(t, true), h);
        out.push_back({(atoms[s].value + atoms[t].value) / Value(2), std::exp(log_choose + lo + hi)});
      }
      const Real under = below_at(s, true);
      const Real over = above_at(s, true);
      const Real l_under = under > 0 ? std::log(under) : 0.0L;
      const Real l_over = over > 0 ? std::log(over) : 0.0L;
      const Real l_at = std::log(atoms[s].prob);
      CompensatedSum diag;
      for (std::uint64_t a = 0; a < h; ++a) {
        if (a > 0 && under <= 0) break;
        for (std::uint64_t b = 0; b < h; ++b) {
          if (b > 0 && over <= 0) break;
          const std::uint64_t c = m - a - b;
          diag.add(std::exp(lf[m] - lf[a] - lf[b] - lf[c] + static_cast<Real>(a) * l_under +
                            static_cast<Real>(b) * l_over + static_cast<Real>(c) * l_at));
        }
      }
      out.push_back({atoms[s].value, diag.value()});
    }
  }
  return DiscreteDistribution<P>::from_atoms(std::move(out));
}

// Two-point law: the mean is a + c(b-a)/m with c ~ Bin(m, P(b)).
template <Probability P>
DiscreteDistribution<P> mean_two_point(const DiscreteDistribution<P>& d, std::uint64_t m) {
  const Value a = d[0].value;
  const Value b = d[1].value;
  const Value step = (b - a) / Value(static_cast<std::int64_t>(m));
  auto value_at = [&](std::uint64_t c) { return a + step * Value(static_cast<std::int64_t>(c)); };
  std::vector<Atom<P>> out;
  if constexpr (is_exact_v<P>) {
    const Exact& qa = d[0].prob;
    const Exact& qb = d[1].prob;
    const Exact ratio = qb / qa;
    Exact pmf;
    {
      mpz_class num, den;
      mpz_pow_ui(num.get_mpz_t(), qa.get_num_mpz_t(), m);
      mpz_pow_ui(den.get_mpz_t(), qa.get_den_mpz_t(), m);
      pmf = Exact(num, den);
      pmf.canonicalize();
    }
    out.reserve(m + 1);
    for (std::uint64_t c = 0; c <= m; ++c) {
      out.push_back({value_at(c), pmf});
      if (c < m) {
        Exact step_ratio(static_cast<long>(m - c), static_cast<long>(c + 1));
        step_ratio.canonicalize();
        pmf = pmf * ratio * step_ratio;
      }
    }
  } else {
    const Real qa = d[0].prob;
    const Real qb = d[1].prob;
    const auto mode = static_cast<std::uint64_t>(std::floor(static_cast<Real>(m + 1) * qb));
    const std::uint64_t c0 = std::min(mode, m);
    const Real up = qb / qa;
    const Real down = qa / qb;
    const Real p0 = std::exp(log_binomial_pmf(m, c0, qb));
    std::vector<Atom<P>> lower;
    Real pmf_down = p0;
    for (std::uint64_t c = c0;;) {
      lower.push_back({value_at(c), pmf_down});
      if (c == 0) break;
      pmf_down *= down * static_cast<Real>(c) / static_cast<Real>(m - c + 1);
      --c;
      if (pmf_down == 0.0L) break;
    }
    out.assign(lower.rbegin(), lower.rend());
    Real pmf = p0;
    for (std::uint64_t c = c0; c < m;) {
      pmf *= up * static_cast<Real>(m - c) / static_cast<Real>(c + 1);
      ++c;
      if (pmf == 0.0L) break;
      out.push_back({value_at(c), pmf});
    }
  }
  return DiscreteDistribution<P>::from_sorted(std::move(out));
}

// Three-point law by trinomial composition counts.
template <Probability P>
DiscreteDistribution<P> mean_three_point(const DiscreteDistribution<P>& d, std::uint64_t m) {
  std::map<Value, P> acc;
  const Value M(static_cast<std::int64_t>(m));
  const Value v0 = d[0].value, v1 = d[1].value, v2 = d[2].value;
  if constexpr (is_exact_v<P>) {
    std::vector<std::vector<Exact>> pw(3, std::vector<Exact>(m + 1));
    for (std::size_t t = 0; t < 3; ++t) {
      pw[t][0] = 1;
      for (std::uint64_t e = 1; e <= m; ++e) pw[t][e] = pw[t][e - 1] * d[t].prob;
    }
    std::vector<mpz_class> fact(m + 1);
    fact[0] = 1;
    for (std::uint64_t t = 1; t <= m; ++t) fact[t] = fact[t - 1] * static_cast<unsigned long>(t);
    for (std::uint64_t c1 = 0; c1 <= m; ++c1)
      for (std::uint64_t c2 = 0; c1 + c2 <= m; ++c2) {
        const std::uint64_t c0 = m - c1 - c2;
        const mpz_class coef = fact[m] / (fact[c0] * fact[c1] * fact[c2]);
        const Value v = (v0 * Value(static_cast<std::int64_t>(c0)) + v1 * Value(static_cast<std::int64_t>(c1)) +
                         v2 * Value(static_cast<std::int64_t>(c2))) / M;
        acc[v] += Exact(coef) * pw[0][c0] * pw[1][c1] * pw[2][c2];
      }
  } else {
    const auto lf = log_factorials(m);
    const Real l0 = std::log(d[0].prob), l1 = std::log(d[1].prob), l2 = std::log(d[2].prob);
    for (std::uint64_t c1 = 0; c1 <= m; ++c1)
      for (std::uint64_t c2 = 0; c1 + c2 <= m; ++c2) {
        const std::uint64_t c0 = m - c1 - c2;
        const Real p = std::exp(lf[m] - lf[c0] - lf[c1] - lf[c2] + static_cast<Real>(c0) * l0 +
                                static_cast<Real>(c1) * l1 + static_cast<Real>(c2) * l2);
        if (p == 0.0L) continue;
        const Value v = (v0 * Value(static_cast<std::int64_t>(c0)) + v1 * Value(static_cast<std::int64_t>(c1)) +
                         v2 * Value(static_cast<std::int64_t>(c2))) / M;
        acc[v] += p;
      }
  }
  std::vector<Atom<P>> out;
  out.reserve(acc.size());
  for (auto& [v, p] : acc) out.push_back({v, p});
  return DiscreteDistribution<P>::from_sorted(std::move(out));
}

// General support: m-fold convolution of the sum, merged by value.
template <Probability P>
DiscreteDistribution<P> mean_convolution(const DiscreteDistribution<P>& d, std::uint64_t m) {
  constexpr std::size_t kSupportCap = 20'000'000;
  std::map<Value, P> sum{{Value(0), from_int<P>(1)}};
  for (std::uint64_t s = 0; s < m; ++s) {
    std::map<Value, P> next;
    for (const auto& [v, p] : sum)
      for (const auto& a : d.atoms()) next[v + a.value] += p * a.prob;
    if (next.size() > kSupportCap)
      throw UnsupportedConfiguration("mean_distribution: support exceeds 2e7 atoms; use Monte Carlo estimates");
    sum = std::move(next);
  }
  const Value M(static_cast<std::int64_t>(m));
  std::vector<Atom<P>> out;
  out.reserve(sum.size());
  for (auto& [v, p] : sum) out.push_back({v / M, p});
  return DiscreteDistribution<P>::from_sorted(std::move(out));
}

}  // namespace detail

/// Exact law of the median of m independent draws from d.
template <Probability P>
DiscreteDistribution<P> median_distribution(const DiscreteDistribution<P>& d, std::uint64_t m) {
  if (m == 0) throw UsageError("median_distribution: m must be >= 1");
  if (d.empty()) throw UsageError("median_distribution: empty distribution");
  if (m == 1 || d.degenerate()) return d;
  detail::check_exact_limit<P>(m, "median_distribution");
  if (m % 2 == 1) return detail::median_odd(d, m);
  if (d.size() > kEvenMedianSupportLimit)
    throw UnsupportedConfiguration("median_distribution: even m needs support <= 8 (got " + std::to_string(d.size()) +
                                   "); use odd m or Monte Carlo estimates");
  detail::check_enumeration_budget(d.size(), m, "median_distribution (even m)");
  return detail::median_even(d, m);
}

/// Exact law of the mean of m independent draws from d.
template <Probability P>
DiscreteDistribution<P> mean_distribution(const DiscreteDistribution<P>& d, std::uint64_t m) {
  if (m == 0) throw UsageError("mean_distribution: m must be >= 1");
  if (d.empty()) throw UsageError("mean_distribution: empty distribution");
  if (m == 1 || d.degenerate()) return d;
  detail::check_exact_limit<P>(m, "mean_distribution");
  if (d.size() == 2) return detail::mean_two_point(d, m);
  detail::check_enumeration_budget(d.size(), m, "mean_distribution");
  if (d.size() == 3) return detail::mean_three_point(d, m);
  return detail::mean_convolution(d, m);
}

template <Probability P>
DiscreteDistribution<P> estimator_distribution(const Estimator& est, const DiscreteDistribution<P>& d) {
  switch (est.strategy) {
    case Strategy::raw: return d;
    case Strategy::mean: return mean_distribution(d, est.m);
    case Strategy::median: return median_distribution(d, est.m);
  }
  return d;
}

namespace detail {

// sum_u P(parent=u) * P(offspring >= u)  (or > u when strict), by a merged sweep.
template <Probability P>
P comparison_sweep(const DiscreteDistribution<P>& parent, const DiscreteDistribution<P>& offspring, bool strict) {
  const auto& off = offspring.atoms();
  std::vector<P> suffix(off.size() + 1, from_int<P>(0));
  for (std::size_t k = off.size(); k-- > 0;) suffix[k] = suffix[k + 1] + off[k].prob;
  P total = from_int<P>(0);
  std::size_t idx = 0;
  for (const auto& u : parent.atoms()) {
    while (idx < off.size() && (strict ? off[idx].value <= u.value : off[idx].value < u.value)) ++idx;
    if (idx == off.size()) break;
    total += u.prob * suffix[idx];
  }
  return total;
}

}  // namespace detail

/// P(offspring estimate >= parent estimate) for independent estimates; ties accept.
template <Probability P>
P accept_probability(const DiscreteDistribution<P>& parent, const DiscreteDistribution<P>& offspring) {
  return detail::comparison_sweep(parent, offspring, false);
}

/// P(offspring estimate > parent estimate).
template <Probability P>
P accept_probability_strict(const DiscreteDistribution<P>& parent, const DiscreteDistribution<P>& offspring) {
  return detail::comparison_sweep(parent, offspring, true);
}

// ---------------------------------------------------------------------------
// Sampling procedures.

/// Draws m fresh noisy evaluations of a solution with `i` 0-bits and applies the estimator.
inline Value sample_estimate(const Estimator& est, const NoiseModel& noise, std::size_t i, RandomStream& rng) {
  std::vector<Value> samples(est.m);
  for (auto& s : samples) s = noisy_sample(noise, i, rng);
  switch (est.strategy) {
    case Strategy::raw: return samples.front();
    case Strategy::mean: return mean_estimate(samples);
    case Strategy::median: return median_estimate_inplace(samples);
  }
  return samples.front();
}

/// Bit-string form; `scratch` is reused across calls.
inline Value sample_estimate(const Estimator& est, const NoiseModel& noise, const Solution& x, std::size_t zeros,
                             RandomStream& rng, std::vector<Value>& scratch) {
  scratch.resize(est.m);
  for (auto& s : scratch) s = noisy_sample(noise, x, zeros, rng);
  switch (est.strategy) {
    case Strategy::raw: return scratch.front();
    case Strategy::mean: return mean_estimate(scratch);
    case Strategy::median: return median_estimate_inplace(scratch);
  }
  return scratch.front();
}

}  // namespace medsamp
