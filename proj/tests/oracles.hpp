#pragma once

// Independent brute-force reference computations used only by the tests.

#include <cmath>
#include <map>
#include <vector>

#include "medsamp/medsamp.hpp"

namespace oracle {

using medsamp::Exact;
using medsamp::Fraction;
using medsamp::Real;
using medsamp::Value;

// Noisy fitness law of a concrete bit string, straight from the noise definitions.
inline std::map<Value, Exact> noisy_law(const medsamp::NoiseModel& m, const std::vector<int>& bits) {
  const auto n = static_cast<std::int64_t>(bits.size());
  std::int64_t ones = 0;
  for (int b : bits) ones += b;
  const std::int64_t zeros = n - ones;
  std::map<Value, Exact> law;
  auto add = [&](Value v, Exact p) {
    if (p != 0) law[v] += p;
  };
  const Exact N(n);
  switch (m.kind) {
    case medsamp::NoiseKind::none: add(Value(ones), 1); break;
    case medsamp::NoiseKind::one_bit: {
      const Exact p(mpz_class(m.p.num()), mpz_class(m.p.den()));
      add(Value(ones), 1 - p);
      for (std::int64_t k = 0; k < n; ++k) add(Value(bits[k] ? ones - 1 : ones + 1), p / N);
      break;
    }
    case medsamp::NoiseKind::segmented: {
      const auto t1 = static_cast<std::int64_t>(m.theta1);
      const auto t2 = static_cast<std::int64_t>(m.theta2);
      if (zeros > t2) {
        add(Value(ones), 1);
      } else if (zeros > t1) {
        add(Value(ones), Exact(1, 2) + 1 / N);
        add(Value(3 * n + zeros), Exact(1, 2) - 1 / N);
      } else {
        add(Value(4 * n * ones), 1 - 1 / N);
        add(Value((2 * n + zeros) * (2 * n + zeros) * (2 * n + zeros)), 1 / N);
      }
      break;
    }
    case medsamp::NoiseKind::partial:
      if (2 * zeros >= n) {
        add(Value(ones), 1);
      } else {
        add(Value(zeros, 2), Exact(2, 3));
        add(Value(2 * ones), Exact(1, 3));
      }
      break;
  }
  return law;
}

// Mutation law over zero counts by enumerating all 2^n flip masks.
inline std::vector<Exact> kernel_row_by_masks(std::size_t n, std::size_t i) {
  std::vector<Exact> row(n + 1);
  const Exact p(1, static_cast<long>(n));
  const Exact q = 1 - p;
  for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    // parent: first i bits are 0
    std::size_t zeros = 0;
    int flips = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const bool flip = (mask >> k) & 1U;
      flips += flip;
      const bool bit_is_zero = k < i;
      if (bit_is_zero != flip) ++zeros;
    }
    Exact w = 1;
    for (int f = 0; f < flips; ++f) w *= p;
    for (std::size_t f = flips; f < n; ++f) w *= q;
    row[zeros] += w;
  }
  return row;
}

// Law of mean or median over all k^m ordered tuples.
inline std::map<Value, Exact> estimator_law_by_tuples(const std::map<Value, Exact>& d, std::size_t m, bool median) {
  std::vector<std::pair<Value, Exact>> atoms(d.begin(), d.end());
  const std::size_t k = atoms.size();
  std::map<Value, Exact> out;
  std::vector<std::size_t> idx(m, 0);
  std::vector<Value> sample(m);
  for (;;) {
    Exact w = 1;
    for (std::size_t s = 0; s < m; ++s) {
      sample[s] = atoms[idx[s]].first;
      w *= atoms[idx[s]].second;
    }
    const Value v = median ? medsamp::median_estimate(sample) : medsamp::mean_estimate(sample);
    out[v] += w;
    std::size_t pos = 0;
    while (pos < m && ++idx[pos] == k) idx[pos++] = 0;
    if (pos == m) break;
  }
  return out;
}

template <class D>
std::map<Value, Exact> as_map(const D& dist) {
  std::map<Value, Exact> m;
  for (const auto& a : dist.atoms()) m[a.value] = a.prob;
  return m;
}

// P(B >= A) over all pairs.
inline Exact naive_accept(const std::map<Value, Exact>& parent, const std::map<Value, Exact>& offspring) {
  Exact s = 0;
  for (const auto& [u, pu] : parent)
    for (const auto& [v, pv] : offspring)
      if (v >= u) s += pu * pv;
  return s;
}

// Gaussian elimination over the rationals for (I - Q) E = 1 on states 1..n.
inline std::vector<Exact> efht_by_elimination(const medsamp::Matrix<Exact>& T) {
  const std::size_t n = T.size() - 1;
  std::vector<std::vector<Exact>> a(n, std::vector<Exact>(n + 1));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) a[r][c] = (r == c ? Exact(1) : Exact(0)) - T(r + 1, c + 1);
    a[r][n] = 1;
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    while (a[piv][c] == 0) ++piv;
    std::swap(a[piv], a[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c] == 0) continue;
      const Exact f = a[r][c] / a[c][c];
      for (std::size_t k = c; k <= n; ++k) a[r][k] -= f * a[c][k];
    }
  }
  std::vector<Exact> E(n + 1, Exact(0));
  for (std::size_t r = 0; r < n; ++r) E[r + 1] = a[r][n] / a[r][r];
  return E;
}

// Value iteration E <- 1 + T E with E[0] = 0, accelerated by doubling:
// E_{2k} = E_k + Q^k E_k, Q^{2k} = Q^k Q^k, where Q is T restricted to states 1..n.
inline std::vector<Real> efht_by_value_iteration(const medsamp::Matrix<Real>& T, int max_doublings = 200) {
  const std::size_t n = T.size() - 1;
  std::vector<std::vector<Real>> Q(n, std::vector<Real>(n));
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) Q[r][c] = T(r + 1, c + 1);
  std::vector<Real> E(n, 1.0L);  // E_1 = 1 (one step)
  for (int it = 0; it < max_doublings; ++it) {
    std::vector<Real> add(n, 0.0L);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) add[r] += Q[r][c] * E[c];
    Real change = 0.0L;
    for (std::size_t r = 0; r < n; ++r) {
      change = std::max(change, add[r] / (E[r] + add[r]));
      E[r] += add[r];
    }
    if (change < 1e-22L) break;
    std::vector<std::vector<Real>> Q2(n, std::vector<Real>(n, 0.0L));
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t k = 0; k < n; ++k) {
        if (Q[r][k] == 0) continue;
        for (std::size_t c = 0; c < n; ++c) Q2[r][c] += Q[r][k] * Q[k][c];
      }
    Q = std::move(Q2);
  }
  std::vector<Real> out(n + 1, 0.0L);
  for (std::size_t r = 0; r < n; ++r) out[r + 1] = E[r];
  return out;
}

inline Real rel_err(Real a, Real b) {
  const Real scale = std::max(std::fabs(a), std::fabs(b));
  return scale == 0 ? 0.0L : std::fabs(a - b) / scale;
}

}  // namespace oracle
