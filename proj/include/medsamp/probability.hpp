#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdio>
#include <concepts>
#include <limits>
#include <string>
#include <type_traits>
#include <vector>

#include "medsamp/fraction.hpp"

namespace medsamp {

/// Exact probabilities (GMP rationals).
using Exact = mpq_class;
/// Floating probabilities. x87 extended precision: 64-bit mantissa, exponent down to ~1e-4951.
using Real = long double;

template <class P>
inline constexpr bool is_exact_v = std::is_same_v<P, Exact>;

template <class P>
concept Probability = std::same_as<P, Exact> || std::same_as<P, Real>;

template <Probability P>
P from_fraction(const Fraction& f) {
  if constexpr (is_exact_v<P>) {
    static_assert(sizeof(long) == sizeof(Fraction::int_type));
    return mpq_class(mpz_class(static_cast<long>(f.num())), mpz_class(static_cast<long>(f.den())));
  } else {
    return f.to_real();
  }
}

template <Probability P>
P from_int(long long v) {
  if constexpr (is_exact_v<P>) {
    return mpq_class(mpz_class(static_cast<long>(v)));
  } else {
    return static_cast<Real>(v);
  }
}

inline Real to_real(const Exact& q) {
  // mpq -> long double without double-range underflow: scale by powers of two.
  if (sgn(q) == 0) return 0.0L;
  long exp_num = 0;
  long exp_den = 0;
  const double mn = mpz_get_d_2exp(&exp_num, q.get_num_mpz_t());
  const double md = mpz_get_d_2exp(&exp_den, q.get_den_mpz_t());
  return std::ldexp(static_cast<Real>(mn) / static_cast<Real>(md), static_cast<int>(exp_num - exp_den));
}
inline Real to_real(Real x) { return x; }

template <Probability P>
std::string prob_str(const P& p) {
  if constexpr (is_exact_v<P>) {
    return p.get_str();
  } else {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.21Lg", p);
    return buf;
  }
}

/// Dense square matrix, row-major.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t size, const T& fill = T(0)) : size_(size), data_(size * size, fill) {}

  [[nodiscard]] std::size_t size() const { return size_; }
  T& operator()(std::size_t r, std::size_t c) { return data_[r * size_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * size_ + c]; }

 private:
  std::size_t size_ = 0;
  std::vector<T> data_;
};

/// Neumaier-compensated summation.
class CompensatedSum {
 public:
  void add(Real x) {
    const Real t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  [[nodiscard]] Real value() const { return sum_ + comp_; }

 private:
  Real sum_ = 0.0L;
  Real comp_ = 0.0L;
};

}  // namespace medsamp
