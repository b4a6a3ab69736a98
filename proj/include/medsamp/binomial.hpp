#pragma once

#include <gmpxx.h>

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <cstdint>
#include <vector>

#include "medsamp/errors.hpp"
#include "medsamp/probability.hpp"

namespace medsamp {

/// Above this sample count Real tails switch from direct summation to the incomplete beta function.
inline constexpr std::uint64_t kDirectTailLimit = 10000;

/// Log factorials 0..m.
inline std::vector<Real> log_factorials(std::uint64_t m) {
  std::vector<Real> lf(m + 1, 0.0L);
  for (std::uint64_t k = 2; k <= m; ++k) lf[k] = std::lgamma(static_cast<Real>(k) + 1.0L);
  return lf;
}

inline Real log_binomial_pmf(std::uint64_t m, std::uint64_t k, Real x) {
  const Real lc = std::lgamma(static_cast<Real>(m) + 1.0L) - std::lgamma(static_cast<Real>(k) + 1.0L) -
                  std::lgamma(static_cast<Real>(m - k) + 1.0L);
  const Real a = k == 0 ? 0.0L : static_cast<Real>(k) * std::log(x);
  const Real b = k == m ? 0.0L : static_cast<Real>(m - k) * std::log1p(-x);
  return lc + a + b;
}

/// P(Bin(m, x) >= k) by summing pmf terms (all positive, so small tails keep relative accuracy).
inline Real binomial_upper_tail_direct(std::uint64_t m, std::uint64_t k, Real x) {
  if (k == 0) return 1.0L;
  if (k > m || x <= 0.0L) return 0.0L;
  if (x >= 1.0L) return 1.0L;
  const Real lm = std::lgamma(static_cast<Real>(m) + 1.0L);
  const Real lx = std::log(x);
  const Real l1x = std::log1p(-x);
  CompensatedSum sum;
  for (std::uint64_t j = k; j <= m; ++j) {
    const Real lt = lm - std::lgamma(static_cast<Real>(j) + 1.0L) - std::lgamma(static_cast<Real>(m - j) + 1.0L) +
                    static_cast<Real>(j) * lx + (j == m ? 0.0L : static_cast<Real>(m - j) * l1x);
    sum.add(std::exp(lt));
  }
  return sum.value();
}

/// P(Bin(m, x) >= k) = I_x(k, m-k+1); direct summation up to kDirectTailLimit, incomplete beta above.
inline Real binomial_upper_tail(std::uint64_t m, std::uint64_t k, Real x) {
  if (k == 0) return 1.0L;
  if (k > m || x <= 0.0L) return 0.0L;
  if (x >= 1.0L) return 1.0L;
  if (m <= kDirectTailLimit) return binomial_upper_tail_direct(m, k, x);
  return boost::math::ibeta(static_cast<Real>(k), static_cast<Real>(m - k + 1), x);
}

/// Exact P(Bin(m, x) >= k) for rational x.
inline Exact binomial_upper_tail_exact(std::uint64_t m, std::uint64_t k, const Exact& x) {
  if (k == 0 || x >= 1) return Exact(1);
  if (k > m || x <= 0) return Exact(0);
  // sum_{j>=k} C(m,j) a^j c^(m-j) / b^m with x = a/b, c = b - a.
  const mpz_class a = x.get_num();
  const mpz_class b = x.get_den();
  const mpz_class c = b - a;
  std::vector<mpz_class> c_pow(m - k + 1);
  c_pow[0] = 1;
  for (std::uint64_t t = 1; t < c_pow.size(); ++t) c_pow[t] = c_pow[t - 1] * c;
  mpz_class binom;
  mpz_bin_uiui(binom.get_mpz_t(), m, k);
  mpz_class a_pow;
  mpz_pow_ui(a_pow.get_mpz_t(), a.get_mpz_t(), k);
  mpz_class numer = 0;
  for (std::uint64_t j = k; j <= m; ++j) {
    numer += binom * a_pow * c_pow[m - j];
    if (j < m) {
      binom = binom * static_cast<unsigned long>(m - j) / static_cast<unsigned long>(j + 1);
      a_pow *= a;
    }
  }
  mpz_class denom;
  mpz_pow_ui(denom.get_mpz_t(), b.get_mpz_t(), m);
  Exact r(numer, denom);
  r.canonicalize();
  return r;
}

}  // namespace medsamp
