#pragma once

#include <functional>
#include <string>
#include <vector>

#include "medsamp/chain.hpp"
#include "medsamp/fraction.hpp"

namespace medsamp {

enum class DistanceKind { identity, case2, case3, custom };

/*
 * Distance to the optimum over zero counts.
 *
 * case2 (n/(2(n+1)) < p < n/(n+7)), with h = n/(2p):
 *   n/(2p)              if h-3 <= i <= h+3
 *   n - h + 2           if max(1, n-h-3) <= i <= n-h+3
 *   i                   otherwise
 * case3 (p >= n/(n+7)):
 *   n/2                 if n-h-3 <= i <= h+3
 *   i                   otherwise
 * V(0) = 0 in every case.
 */
class DistanceFunction {
 public:
  static DistanceFunction identity(std::size_t n) { return DistanceFunction(DistanceKind::identity, n, Fraction(0)); }

  static DistanceFunction case2(std::size_t n, Fraction p) {
    const auto N = static_cast<std::int64_t>(n);
    if (!(Fraction(N, 2 * (N + 1)) < p && p < Fraction(N, N + 7)))
      throw UsageError("distance case2 requires n/(2(n+1)) < p < n/(n+7)");
    return DistanceFunction(DistanceKind::case2, n, p);
  }

  static DistanceFunction case3(std::size_t n, Fraction p) {
    const auto N = static_cast<std::int64_t>(n);
    if (!(p >= Fraction(N, N + 7) && p <= Fraction(1))) throw UsageError("distance case3 requires n/(n+7) <= p <= 1");
    return DistanceFunction(DistanceKind::case3, n, p);
  }

  /// Arbitrary table V[0..n]; requires V[0] = 0 and V[i] > 0 otherwise.
  static DistanceFunction custom(std::vector<Fraction> table) {
    if (table.empty()) throw UsageError("distance table is empty");
    DistanceFunction df(DistanceKind::custom, table.size() - 1, Fraction(0));
    df.values_ = std::move(table);
    df.validate();
    return df;
  }

  /// k * V, for a positive constant k.
  [[nodiscard]] DistanceFunction scaled(Fraction k) const {
    if (!(k > Fraction(0))) throw UsageError("distance scale must be positive");
    std::vector<Fraction> t = values_;
    for (auto& v : t) v = v * k;
    return custom(std::move(t));
  }

  [[nodiscard]] DistanceKind kind() const { return kind_; }
  [[nodiscard]] std::size_t n() const { return n_; }
  [[nodiscard]] const Fraction& p() const { return p_; }
  [[nodiscard]] const std::vector<Fraction>& values() const { return values_; }
  const Fraction& operator()(std::size_t i) const { return values_.at(i); }

  [[nodiscard]] std::string label() const {
    switch (kind_) {
      case DistanceKind::identity: return "identity";
      case DistanceKind::case2: return "case2(p=" + p_.str() + ")";
      case DistanceKind::case3: return "case3(p=" + p_.str() + ")";
      case DistanceKind::custom: return "custom";
    }
    return "?";
  }

 private:
  DistanceFunction(DistanceKind kind, std::size_t n, Fraction p) : kind_(kind), n_(n), p_(p) {
    if (kind == DistanceKind::custom) return;
    values_.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i) values_[i] = evaluate(i);
    validate();
  }

  [[nodiscard]] Fraction evaluate(std::size_t i) const {
    const auto N = static_cast<std::int64_t>(n_);
    const Fraction I(static_cast<std::int64_t>(i));
    if (i == 0 || kind_ == DistanceKind::identity) return I;
    const Fraction h = Fraction(N) / (Fraction(2) * p_);
    const Fraction three(3);
    if (kind_ == DistanceKind::case2) {
      if (h - three <= I && I <= h + three) return h;
      const Fraction lo = std::max(Fraction(1), Fraction(N) - h - three);
      if (lo <= I && I <= Fraction(N) - h + three) return Fraction(N) - h + Fraction(2);
      return I;
    }
    if (Fraction(N) - h - three <= I && I <= h + three) return Fraction(N, 2);
    return I;
  }

  void validate() const {
    if (values_[0] != Fraction(0)) throw UsageError("distance function must vanish at the optimum");
    for (std::size_t i = 1; i < values_.size(); ++i)
      if (!(values_[i] > Fraction(0)))
        throw UsageError("distance function must be positive off the optimum (state " + std::to_string(i) + ")");
  }

  DistanceKind kind_;
  std::size_t n_;
  Fraction p_;
  std::vector<Fraction> values_;
};

inline Fraction distance_value(const DistanceFunction& df, std::size_t i) { return df(i); }

template <Probability P>
struct DriftComponents {
  P total;     // E+ - E-
  P positive;  // E+
  P negative;  // E-
  P direct;    // sum_j T(i,j) (V(i) - V(j)), computed from the transition row
};

template <Probability P>
DriftComponents<P> drift(const LumpedChain<P>& c, const DistanceFunction& df, std::size_t i) {
  if (i < 1 || i > c.n) throw UsageError("drift: state must satisfy 1 <= i <= n");
  if (df.n() != c.n) throw UsageError("drift: distance function built for a different n");
  DriftComponents<P> r{from_int<P>(0), from_int<P>(0), from_int<P>(0), from_int<P>(0)};
  const Fraction vi = df(i);
  for (std::size_t j = 0; j <= c.n; ++j) {
    if (j == i) continue;
    const Fraction vj = df(j);
    if (vj < vi) r.positive += c.kernel(i, j) * c.accept(i, j) * from_fraction<P>(vi - vj);
    if (vj > vi) r.negative += c.kernel(i, j) * c.accept(i, j) * from_fraction<P>(vj - vi);
  }
  r.total = r.positive - r.negative;
  for (std::size_t j = 0; j <= c.n; ++j) r.direct += c.transition(i, j) * from_fraction<P>(vi - df(j));
  return r;
}

template <Probability P>
struct DriftBound {
  P c;                   // min over non-optimal states of the total drift
  std::size_t argmin;    // state attaining it
  Real bound;            // V(start) / c
};

/// Additive drift bound V(start)/c; throws InapplicableBound when some non-optimal state has drift <= 0.
template <Probability P>
DriftBound<P> additive_drift_bound(const DistanceFunction& df, const LumpedChain<P>& c, std::size_t start) {
  if (start > c.n) throw UsageError("additive_drift_bound: start exceeds n");
  std::optional<P> best;
  std::size_t arg = 0;
  for (std::size_t j = 1; j <= c.n; ++j) {
    const P t = drift(c, df, j).total;
    if (!best || t < *best) {
      best = t;
      arg = j;
    }
  }
  if (!best) throw InapplicableBound("additive_drift_bound: chain has no non-optimal state");
  if (!(*best > 0))
    throw InapplicableBound("additive_drift_bound: drift at state " + std::to_string(arg) + " is " + prob_str(*best) +
                            " (must be > 0)");
  return {*best, arg, df(start).to_real() / to_real(*best)};
}

}  // namespace medsamp
