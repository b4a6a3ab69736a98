#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "medsamp/chain.hpp"

namespace medsamp {

// ---------------------------------------------------------------------------
// Median concentration under one-bit noise.

struct ConcentrationCase {
  std::string label;       // "i", "ii", "iii" or "iii-exact"
  std::string event;       // e.g. "f = n-i-1", "f <= n-i"
  Value predicted;         // predicted median value (upper end for "<=" events)
  Real probability = 0.0L;
  Real bound = 0.0L;       // 1 - 2 exp(-2 delta^2 m / n^2)
};

struct ConcentrationReport {
  std::size_t n = 0, i = 0;
  std::uint64_t m = 0;
  std::vector<ConcentrationCase> cases;  // empty: no applicable case
  [[nodiscard]] bool applicable() const { return !cases.empty(); }
};

namespace detail {

inline Real concentration_bound(const Fraction& delta, std::size_t n, std::uint64_t m) {
  const Real d = delta.to_real();
  const auto N = static_cast<Real>(n);
  return 1.0L - 2.0L * std::exp(-2.0L * d * d * static_cast<Real>(m) / (N * N));
}

inline Real prob_at_most(const DiscreteDistribution<Real>& d, const Value& v) {
  CompensatedSum s;
  for (const auto& a : d.atoms())
    if (a.value <= v) s.add(a.prob);
  return s.value();
}

}  // namespace detail

/// Exact probabilities of the predicted median under one-bit noise, for each case whose margin holds with `delta`.
inline ConcentrationReport lemma2_verify(std::size_t n, const Fraction& p, std::size_t i, std::uint64_t m,
                                         const Fraction& delta) {
  if (m % 2 == 0) throw UsageError("lemma2_verify: m must be odd");
  if (!(delta > Fraction(0))) throw UsageError("lemma2_verify: delta must be positive");
  if (i > n) throw UsageError("lemma2_verify: i exceeds n");
  const auto N = static_cast<std::int64_t>(n);
  const auto I = static_cast<std::int64_t>(i);
  const Fraction half(1, 2);
  const Fraction margin = delta / Fraction(N);
  const Fraction down = p * Fraction(N - I, N);
  const Fraction up = p * Fraction(I, N);
  const auto law = median_distribution(onebit_pmf<Real>(n, i, p), m);
  const Real bound = detail::concentration_bound(delta, n, m);
  ConcentrationReport r{n, i, m, {}};
  if (down >= half + margin)
    r.cases.push_back({"i", "f = n-i-1", Value(N - I - 1), law.prob_of(Value(N - I - 1)), bound});
  if (up >= half + margin)
    r.cases.push_back({"ii", "f = n-i+1", Value(N - I + 1), law.prob_of(Value(N - I + 1)), bound});
  if (up <= half - margin) {
    r.cases.push_back({"iii", "f <= n-i", Value(N - I), detail::prob_at_most(law, Value(N - I)), bound});
    if (down <= half - margin)
      r.cases.push_back({"iii-exact", "f = n-i", Value(N - I), law.prob_of(Value(N - I)), bound});
  }
  return r;
}

struct SegmentReport {
  std::string segment;  // "outlier", "coin", "exact"
  Value majority;
  Real probability = 0.0L;
};

/// Probability that the median under segmented noise equals the majority atom of the state's segment.
inline SegmentReport lemma6_verify(std::size_t n, std::size_t theta1, std::size_t theta2, std::size_t i,
                                   std::uint64_t m) {
  if (m % 2 == 0) throw UsageError("lemma6_verify: m must be odd");
  if (!(theta1 < theta2 && theta2 <= n)) throw UsageError("lemma6_verify: need theta1 < theta2 <= n");
  if (i > n) throw UsageError("lemma6_verify: i exceeds n");
  const auto N = static_cast<std::int64_t>(n);
  const auto I = static_cast<std::int64_t>(i);
  if (i > theta2) return {"exact", Value(N - I), 1.0L};
  const auto law = median_distribution(segmented_pmf<Real>(n, i, theta1, theta2), m);
  if (i > theta1) return {"coin", Value(N - I), law.prob_of(Value(N - I))};
  return {"outlier", Value(4 * N * (N - I)), law.prob_of(Value(4 * N * (N - I)))};
}

// ---------------------------------------------------------------------------
// Comparison-probability conditions on P(f(x^a) < f(x^b)).

struct ConditionCheck {
  bool pass = true;
  std::optional<std::pair<std::size_t, std::size_t>> witness;  // (i, j) of the first violation
  std::string condition;                                      // which quantified condition it violates
  Real margin = std::numeric_limits<Real>::infinity();        // min over checked pairs of the slack (>= 0 on pass)
};

/// P(f(x^a) < f(x^b)) for every pair, from per-state estimator laws.
template <Probability P>
class ComparisonTable {
 public:
  explicit ComparisonTable(const std::vector<DiscreteDistribution<P>>& laws) : laws_(&laws) {}
  explicit ComparisonTable(const LumpedChain<P>& c) : laws_(&c.laws) {}

  [[nodiscard]] std::size_t n() const { return laws_->size() - 1; }
  [[nodiscard]] Real less(std::size_t a, std::size_t b) const {
    return to_real(accept_probability_strict((*laws_)[a], (*laws_)[b]));
  }

 private:
  const std::vector<DiscreteDistribution<P>>* laws_;
};

/*
 * Upper-bound conditions, for 0 < c <= 1/15 and 2 < l <= n/2:
 *   (a) for all 0 < i <= j:  P(f(x^j) < f(x^(i-1))) >= 1 - l/n
 *   (b) for all l < i <= j:  P(f(x^j) < f(x^(i-1))) >= 1 - c i/n
 */
template <Probability P>
ConditionCheck lemma3_check(const ComparisonTable<P>& table, Real l, const Fraction& c) {
  const std::size_t n = table.n();
  const auto N = static_cast<Real>(n);
  if (!(c > Fraction(0) && c <= Fraction(1, 15))) throw UsageError("lemma3_check: need 0 < c <= 1/15");
  if (!(l > 2.0L && l <= N / 2.0L)) throw UsageError("lemma3_check: need 2 < l <= n/2");
  const Real cr = c.to_real();
  ConditionCheck out;
  auto consider = [&](std::size_t i, std::size_t j, Real slack, const char* which) {
    out.margin = std::min(out.margin, slack);
    if (slack < 0 && out.pass) {
      out.pass = false;
      out.witness = {i, j};
      out.condition = which;
    }
  };
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = i; j <= n; ++j) {
      const Real prob = table.less(j, i - 1);
      consider(i, j, prob - (1.0L - l / N), "a");
      if (static_cast<Real>(i) > l) consider(i, j, prob - (1.0L - cr * static_cast<Real>(i) / N), "b");
    }
  return out;
}

template <Probability P>
ConditionCheck lemma3_check(const LumpedChain<P>& chain, Real l, const Fraction& c) {
  return lemma3_check(ComparisonTable<P>(chain), l, c);
}

/// Lower-bound condition, for l <= n/4 and c >= 16: for all 0 < i <= l, P(f(x^i) < f(x^(i-1))) <= 1 - c i/n.
template <Probability P>
ConditionCheck lemma5_check(const ComparisonTable<P>& table, std::size_t l, const Fraction& c) {
  const std::size_t n = table.n();
  if (c < Fraction(16)) throw UsageError("lemma5_check: need c >= 16");
  if (l < 1 || 4 * l > n) throw UsageError("lemma5_check: need 1 <= l <= n/4");
  const auto N = static_cast<Real>(n);
  const Real cr = c.to_real();
  ConditionCheck out;
  for (std::size_t i = 1; i <= l; ++i) {
    const Real slack = (1.0L - cr * static_cast<Real>(i) / N) - table.less(i, i - 1);
    if (slack < 0 && out.pass) {
      out.pass = false;
      out.witness = {i, i};
      out.condition = "a";
    }
    out.margin = std::min(out.margin, slack);
  }
  return out;
}

template <Probability P>
ConditionCheck lemma5_check(const LumpedChain<P>& chain, std::size_t l, const Fraction& c) {
  return lemma5_check(ComparisonTable<P>(chain), l, c);
}

}  // namespace medsamp
