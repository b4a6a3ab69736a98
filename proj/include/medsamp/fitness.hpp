#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "medsamp/errors.hpp"
#include "medsamp/probability.hpp"
#include "medsamp/random.hpp"

namespace medsamp {

/// Bit string x in {0,1}^n.
class Solution {
 public:
  explicit Solution(std::size_t n) : bits_(n, 0) {
    if (n == 0) throw UsageError("Solution: n must be >= 1");
  }
  explicit Solution(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    if (bits_.empty()) throw UsageError("Solution: n must be >= 1");
    for (auto& b : bits_) b = b ? 1 : 0;
  }

  /// Parses "1010".
  static Solution parse(const std::string& s) {
    std::vector<std::uint8_t> bits;
    for (char c : s) {
      if (c != '0' && c != '1') throw UsageError("Solution: bad bit '" + std::string(1, c) + "'");
      bits.push_back(c == '1');
    }
    return Solution(std::move(bits));
  }

  /// Uniformly random string with exactly `zeros` 0-bits.
  static Solution with_zero_count(std::size_t n, std::size_t zeros, RandomStream& rng) {
    if (zeros > n) throw UsageError("Solution: zero count exceeds n");
    std::vector<std::uint8_t> bits(n, 1);
    std::fill(bits.begin(), bits.begin() + static_cast<std::ptrdiff_t>(zeros), 0);
    for (std::size_t k = n - 1; k > 0; --k) std::swap(bits[k], bits[uniform_below(rng, k + 1)]);
    return Solution(std::move(bits));
  }

  static Solution uniform(std::size_t n, RandomStream& rng) {
    std::vector<std::uint8_t> bits(n);
    for (auto& b : bits) b = static_cast<std::uint8_t>(uniform_below(rng, 2));
    return Solution(std::move(bits));
  }

  [[nodiscard]] std::size_t n() const { return bits_.size(); }
  [[nodiscard]] std::uint8_t operator[](std::size_t k) const { return bits_[k]; }
  void flip(std::size_t k) { bits_[k] ^= 1U; }
  [[nodiscard]] const std::vector<std::uint8_t>& bits() const { return bits_; }

  [[nodiscard]] std::size_t zero_count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{0}));
  }
  [[nodiscard]] bool is_optimal() const { return zero_count() == 0; }

  friend bool operator==(const Solution&, const Solution&) = default;

  [[nodiscard]] std::string str() const {
    std::string s;
    for (auto b : bits_) s.push_back(b ? '1' : '0');
    return s;
  }

 private:
  std::vector<std::uint8_t> bits_;
};

/// OneMax: number of 1-bits.
inline std::int64_t onemax_fitness(const Solution& x) {
  return static_cast<std::int64_t>(x.n() - x.zero_count());
}

/// Standard bit mutation: every bit flips independently with probability exactly 1/n.
inline Solution mutate(const Solution& x, RandomStream& rng) {
  Solution y = x;
  const std::uint64_t n = x.n();
  for (std::size_t k = 0; k < n; ++k)
    if (uniform_below(rng, n) == 0) y.flip(k);
  return y;
}

/// Zero-count transition law of standard bit mutation: P(i, j) = P(offspring has j 0-bits | parent has i).
template <Probability P>
struct MutationKernel {
  std::size_t n = 0;
  Matrix<P> entries;

  const P& operator()(std::size_t i, std::size_t j) const { return entries(i, j); }
};

namespace detail {

inline std::vector<mpz_class> binomial_row(std::size_t n) {
  std::vector<mpz_class> row(n + 1);
  row[0] = 1;
  for (std::size_t k = 1; k <= n; ++k) row[k] = row[k - 1] * static_cast<unsigned long>(n - k + 1) / static_cast<unsigned long>(k);
  return row;
}

// Exact kernel: numerator over the common denominator n^n,
// sum_{a,b} C(i,a) C(n-i,b) (n-1)^(n-a-b).
inline Matrix<Exact> exact_kernel(std::size_t n) {
  std::vector<std::vector<mpz_class>> binom(n + 1);
  for (std::size_t k = 0; k <= n; ++k) binom[k] = binomial_row(k);
  std::vector<mpz_class> pow_nm1(n + 1);
  pow_nm1[0] = 1;
  for (std::size_t k = 1; k <= n; ++k) pow_nm1[k] = pow_nm1[k - 1] * static_cast<unsigned long>(n - 1);
  mpz_class denom;
  mpz_ui_pow_ui(denom.get_mpz_t(), n, n);

  Matrix<Exact> K(n + 1);
  std::vector<mpz_class> numer(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    for (auto& v : numer) v = 0;
    for (std::size_t a = 0; a <= i; ++a)
      for (std::size_t b = 0; b <= n - i; ++b)
        numer[i - a + b] += binom[i][a] * binom[n - i][b] * pow_nm1[n - a - b];
    for (std::size_t j = 0; j <= n; ++j) {
      K(i, j) = mpq_class(numer[j], denom);
      K(i, j).canonicalize();
    }
  }
  return K;
}

// Compensated floating kernel: terms in log space, Neumaier summation per entry.
inline Matrix<Real> real_kernel(std::size_t n) {
  const Real ln_p = std::log(1.0L / static_cast<Real>(n));
  const Real ln_q = std::log1p(-1.0L / static_cast<Real>(n));
  std::vector<Real> lf(n + 1, 0.0L);
  for (std::size_t k = 1; k <= n; ++k) lf[k] = lf[k - 1] + std::log(static_cast<Real>(k));
  // Binomial(t, 1/n) pmf; entries below the long double range are zero.
  auto pmf = [&](std::size_t t) {
    std::vector<Real> out(t + 1);
    for (std::size_t a = 0; a <= t; ++a)
      out[a] = std::exp(lf[t] - lf[a] - lf[t - a] + static_cast<Real>(a) * ln_p + static_cast<Real>(t - a) * ln_q);
    return out;
  };
  Matrix<Real> K(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    // a of the i 0-bits and b of the n-i 1-bits flip: i -> i - a + b
    const auto pa = pmf(i);
    const auto pb = pmf(n - i);
    std::vector<CompensatedSum> acc(n + 1);
    for (std::size_t a = 0; a <= i; ++a) {
      if (pa[a] == 0.0L) continue;
      for (std::size_t b = 0; b <= n - i; ++b)
        if (pb[b] != 0.0L) acc[i - a + b].add(pa[a] * pb[b]);
    }
    for (std::size_t j = 0; j <= n; ++j) K(i, j) = acc[j].value();
  }
  return K;
}

}  // namespace detail

/// Exact rationals when n <= 64 (converted for Real), compensated floating point above.
template <Probability P>
MutationKernel<P> mutation_kernel(std::size_t n) {
  if (n == 0) throw UsageError("mutation_kernel: n must be >= 1");
  MutationKernel<P> k;
  k.n = n;
  if constexpr (is_exact_v<P>) {
    if (n > 256) throw UnsupportedConfiguration("exact mutation kernel limited to n <= 256");
    k.entries = detail::exact_kernel(n);
  } else if (n <= 64) {
    const auto ex = detail::exact_kernel(n);
    k.entries = Matrix<Real>(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
      for (std::size_t j = 0; j <= n; ++j) k.entries(i, j) = to_real(ex(i, j));
  } else {
    k.entries = detail::real_kernel(n);
  }
  return k;
}

}  // namespace medsamp
