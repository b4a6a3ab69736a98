#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "medsamp/errors.hpp"
#include "medsamp/fraction.hpp"
#include "medsamp/probability.hpp"

namespace medsamp {

using Value = Fraction;

template <Probability P>
struct Atom {
  Value value;
  P prob;
};

/*
 * Finite law over exact values.
 *
 * Invariants: values strictly increasing, every stored probability > 0.
 * Normalization is checked by callers via total(); the transforms in this
 * library produce normalized laws up to the dropped underflow mass in Real mode.
 */
template <Probability P>
class DiscreteDistribution {
 public:
  using prob_type = P;
  using atom_type = Atom<P>;

  DiscreteDistribution() = default;

  static DiscreteDistribution point(const Value& v) {
    DiscreteDistribution d;
    d.atoms_.push_back({v, from_int<P>(1)});
    return d;
  }

  /// Sorts by value, merges equal values and drops zero-probability atoms.
  static DiscreteDistribution from_atoms(std::vector<atom_type> atoms) {
    std::sort(atoms.begin(), atoms.end(),
              [](const atom_type& a, const atom_type& b) { return a.value < b.value; });
    DiscreteDistribution d;
    d.atoms_.reserve(atoms.size());
    for (auto& a : atoms) {
      if (a.prob < 0) throw UsageError("negative probability in distribution");
      if (!d.atoms_.empty() && d.atoms_.back().value == a.value) {
        d.atoms_.back().prob += a.prob;
      } else {
        d.atoms_.push_back(std::move(a));
      }
    }
    std::erase_if(d.atoms_, [](const atom_type& a) { return a.prob == 0; });
    return d;
  }

  /// Atoms already sorted with distinct values; zero atoms are still dropped.
  static DiscreteDistribution from_sorted(std::vector<atom_type> atoms) {
    for (std::size_t k = 1; k < atoms.size(); ++k)
      if (!(atoms[k - 1].value < atoms[k].value))
        throw UsageError("from_sorted: values not strictly increasing");
    DiscreteDistribution d;
    d.atoms_ = std::move(atoms);
    std::erase_if(d.atoms_, [](const atom_type& a) { return a.prob == 0; });
    return d;
  }

  [[nodiscard]] const std::vector<atom_type>& atoms() const { return atoms_; }
  [[nodiscard]] std::size_t size() const { return atoms_.size(); }
  [[nodiscard]] bool empty() const { return atoms_.empty(); }
  [[nodiscard]] bool degenerate() const { return atoms_.size() == 1; }
  const atom_type& operator[](std::size_t k) const { return atoms_[k]; }

  [[nodiscard]] P total() const {
    P s = from_int<P>(0);
    for (const auto& a : atoms_) s += a.prob;
    return s;
  }

  /// Probability of exactly `v` (zero when absent).
  [[nodiscard]] P prob_of(const Value& v) const {
    const auto it = std::lower_bound(atoms_.begin(), atoms_.end(), v,
                                     [](const atom_type& a, const Value& x) { return a.value < x; });
    if (it != atoms_.end() && it->value == v) return it->prob;
    return from_int<P>(0);
  }

  [[nodiscard]] P expectation() const {
    P s = from_int<P>(0);
    for (const auto& a : atoms_) s += a.prob * from_fraction<P>(a.value);
    return s;
  }

  /// Converts exact probabilities to Real.
  [[nodiscard]] DiscreteDistribution<Real> to_real() const {
    std::vector<Atom<Real>> out;
    out.reserve(atoms_.size());
    for (const auto& a : atoms_) out.push_back({a.value, medsamp::to_real(a.prob)});
    return DiscreteDistribution<Real>::from_sorted(std::move(out));
  }

  friend bool operator==(const DiscreteDistribution& a, const DiscreteDistribution& b) {
    if (a.atoms_.size() != b.atoms_.size()) return false;
    for (std::size_t k = 0; k < a.atoms_.size(); ++k)
      if (a.atoms_[k].value != b.atoms_[k].value || a.atoms_[k].prob != b.atoms_[k].prob) return false;
    return true;
  }

  [[nodiscard]] std::string str() const {
    std::string s = "{";
    for (std::size_t k = 0; k < atoms_.size(); ++k) {
      if (k) s += ", ";
      s += atoms_[k].value.str() + ": " + prob_str(atoms_[k].prob);
    }
    return s + "}";
  }

 private:
  std::vector<atom_type> atoms_;
};

/// Checks sum-to-one: exactly for Exact, within `tol` for Real.
template <Probability P>
bool is_normalized(const DiscreteDistribution<P>& d, Real tol = 1e-12L) {
  if constexpr (is_exact_v<P>) {
    return d.total() == 1;
  } else {
    return std::fabs(d.total() - 1.0L) <= tol;
  }
}

struct QuantileResult {
  Value value;
  bool ambiguous = false;
};

/*
 * 2-quantile: a value x0 with P(X <= x0) >= 1/2 and P(X >= x0) >= 1/2.
 * Returns the smallest qualifying atom. `ambiguous` is set when another atom,
 * or any point strictly between two atoms, also qualifies.
 */
template <Probability P>
QuantileResult two_quantile(const DiscreteDistribution<P>& d) {
  if (d.empty()) throw UsageError("two_quantile of empty distribution");
  const P half = from_fraction<P>(Fraction(1, 2));
  const P total = d.total();
  const auto& atoms = d.atoms();
  std::vector<P> below_or_at(atoms.size());
  P run = from_int<P>(0);
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    run += atoms[k].prob;
    below_or_at[k] = run;
  }
  std::optional<std::size_t> first;
  std::size_t qualifying = 0;
  bool interior = false;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const P le = below_or_at[k];
    const P ge = total - (k ? below_or_at[k - 1] : from_int<P>(0));
    if (le >= half && ge >= half) {
      if (!first) first = k;
      ++qualifying;
    }
    // A point between atom k and k+1 qualifies iff P(X <= v_k) == 1/2.
    if (k + 1 < atoms.size() && le == half) interior = true;
  }
  if (!first) throw NumericFailure("two_quantile: no qualifying atom (distribution not normalized)");
  return {atoms[*first].value, qualifying > 1 || interior};
}

}  // namespace medsamp
