#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

#include "medsamp/errors.hpp"

namespace medsamp {

/*
 * Exact rational with 64-bit numerator and denominator.
 *
 * Fitness values and estimator outputs live here. Denominators stay small
 * (they divide 2m), numerators stay below ~1e15 at desk scale, so 64 bits
 * with 128-bit intermediates is enough. Every operation checks for overflow
 * and throws std::overflow_error rather than rounding.
 *
 * Invariant: den > 0 and gcd(|num|, den) == 1.
 */
class Fraction {
 public:
  using int_type = std::int64_t;
  using wide_type = __int128;

  constexpr Fraction() = default;
  constexpr Fraction(int_type value) : num_(value) {}  // NOLINT(implicit)
  Fraction(int_type num, int_type den) { assign(num, den); }

  /// v/2 without a gcd.
  static constexpr Fraction half(int_type v) {
    Fraction f;
    if (v % 2 == 0) {
      f.num_ = v / 2;
    } else {
      f.num_ = v;
      f.den_ = 2;
    }
    return f;
  }

  [[nodiscard]] constexpr int_type num() const { return num_; }
  [[nodiscard]] constexpr int_type den() const { return den_; }
  [[nodiscard]] constexpr bool is_integer() const { return den_ == 1; }

  [[nodiscard]] long double to_real() const {
    return static_cast<long double>(num_) / static_cast<long double>(den_);
  }

  friend Fraction operator+(const Fraction& a, const Fraction& b) {
    if (a.den_ == b.den_) return from_wide(wide_type(a.num_) + b.num_, a.den_);
    return from_wide(wide_type(a.num_) * b.den_ + wide_type(b.num_) * a.den_,
                     wide_type(a.den_) * b.den_);
  }
  friend Fraction operator-(const Fraction& a, const Fraction& b) {
    if (a.den_ == b.den_) return from_wide(wide_type(a.num_) - b.num_, a.den_);
    return from_wide(wide_type(a.num_) * b.den_ - wide_type(b.num_) * a.den_,
                     wide_type(a.den_) * b.den_);
  }
  friend Fraction operator*(const Fraction& a, const Fraction& b) {
    return from_wide(wide_type(a.num_) * b.num_, wide_type(a.den_) * b.den_);
  }
  friend Fraction operator/(const Fraction& a, const Fraction& b) {
    if (b.num_ == 0) throw std::domain_error("Fraction: division by zero");
    return from_wide(wide_type(a.num_) * b.den_, wide_type(a.den_) * b.num_);
  }
  Fraction operator-() const { return from_wide(-wide_type(num_), den_); }

  Fraction& operator+=(const Fraction& o) { return *this = *this + o; }
  Fraction& operator-=(const Fraction& o) { return *this = *this - o; }
  Fraction& operator*=(const Fraction& o) { return *this = *this * o; }
  Fraction& operator/=(const Fraction& o) { return *this = *this / o; }

  friend bool operator==(const Fraction& a, const Fraction& b) = default;
  friend std::strong_ordering operator<=>(const Fraction& a, const Fraction& b) {
    if (a.den_ == b.den_) return a.num_ <=> b.num_;
    const wide_type lhs = wide_type(a.num_) * b.den_;
    const wide_type rhs = wide_type(b.num_) * a.den_;
    return lhs < rhs ? std::strong_ordering::less
                     : (lhs > rhs ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  [[nodiscard]] std::string str() const {
    return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_);
  }
  friend std::ostream& operator<<(std::ostream& os, const Fraction& f) { return os << f.str(); }

  /// Parses "7", "-3/4", "0.6" or "1e-3" exactly.
  static Fraction parse(std::string_view text) {
    if (text.empty()) throw UsageError("empty rational literal");
    if (const auto slash = text.find('/'); slash != std::string_view::npos) {
      return Fraction(parse_int(text.substr(0, slash)), parse_int(text.substr(slash + 1)));
    }
    return parse_decimal(text);
  }

  /// Exact rational equal to the shortest decimal that round-trips `x` (0.6 -> 3/5).
  static Fraction from_decimal_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    if (res.ec != std::errc()) throw UsageError("cannot format number");
    return parse_decimal(std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)));
  }

 private:
  int_type num_ = 0;
  int_type den_ = 1;

  void assign(int_type num, int_type den) {
    if (den == 0) throw std::domain_error("Fraction: zero denominator");
    *this = from_wide(num, den);
  }

  static wide_type wide_gcd(wide_type a, wide_type b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
      const wide_type t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  static Fraction from_wide(wide_type num, wide_type den) {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    constexpr wide_type lo64 = INT64_MIN + 1;
    constexpr wide_type hi64 = INT64_MAX;
    wide_type g;
    if (num >= lo64 && num <= hi64 && den <= hi64)
      g = num == 0 ? den : std::gcd(static_cast<int_type>(num), static_cast<int_type>(den));
    else
      g = num == 0 ? den : wide_gcd(num, den);
    num /= g;
    den /= g;
    constexpr wide_type lo = INT64_MIN;
    constexpr wide_type hi = INT64_MAX;
    if (num < lo || num > hi || den > hi) throw std::overflow_error("Fraction: 64-bit overflow");
    Fraction f;
    f.num_ = static_cast<int_type>(num);
    f.den_ = static_cast<int_type>(den);
    return f;
  }

  static int_type parse_int(std::string_view s) {
    int_type v = 0;
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
      throw UsageError("bad integer literal '" + std::string(s) + "'");
    return v;
  }

  static Fraction parse_decimal(std::string_view s) {
    std::string_view mantissa = s;
    int exponent = 0;
    if (const auto e = s.find_first_of("eE"); e != std::string_view::npos) {
      mantissa = s.substr(0, e);
      exponent = static_cast<int>(parse_int(s.substr(e + 1)));
    }
    std::string digits;
    bool negative = false;
    int frac_digits = 0;
    bool seen_point = false;
    for (std::size_t k = 0; k < mantissa.size(); ++k) {
      const char c = mantissa[k];
      if (k == 0 && (c == '-' || c == '+')) {
        negative = c == '-';
      } else if (c == '.' && !seen_point) {
        seen_point = true;
      } else if (c >= '0' && c <= '9') {
        digits.push_back(c);
        if (seen_point) ++frac_digits;
      } else {
        throw UsageError("bad rational literal '" + std::string(s) + "'");
      }
    }
    if (digits.empty()) throw UsageError("bad rational literal '" + std::string(s) + "'");
    Fraction value(parse_int(digits));
    const int scale = exponent - frac_digits;
    Fraction ten_pow(1);
    for (int k = 0; k < std::abs(scale); ++k) ten_pow *= Fraction(10);
    value = scale >= 0 ? value * ten_pow : value / ten_pow;
    return negative ? -value : value;
  }
};

}  // namespace medsamp
