#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "medsamp/distribution.hpp"
#include "medsamp/errors.hpp"
#include "medsamp/fitness.hpp"
#include "medsamp/fraction.hpp"
#include "medsamp/random.hpp"

namespace medsamp {

enum class NoiseKind { none, one_bit, segmented, partial };

inline std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::none: return "none";
    case NoiseKind::one_bit: return "one-bit";
    case NoiseKind::segmented: return "segmented";
    case NoiseKind::partial: return "partial";
  }
  return "?";
}

inline NoiseKind parse_noise_kind(const std::string& s) {
  if (s == "none") return NoiseKind::none;
  if (s == "one-bit") return NoiseKind::one_bit;
  if (s == "segmented") return NoiseKind::segmented;
  if (s == "partial") return NoiseKind::partial;
  throw UsageError("unknown noise kind '" + s + "'");
}

/// A noise model bound to a problem size; produced by NoiseModelSpec::resolve.
struct NoiseModel {
  NoiseKind kind = NoiseKind::none;
  std::size_t n = 1;
  Fraction p{0};            // one-bit
  std::size_t theta1 = 0;   // segmented: i <= theta1 is the outlier segment
  std::size_t theta2 = 0;   // segmented: theta1 < i <= theta2 is the coin-flip segment
  std::vector<std::string> warnings;

  [[nodiscard]] std::string label() const {
    switch (kind) {
      case NoiseKind::one_bit: return "one-bit(p=" + p.str() + ")";
      case NoiseKind::segmented:
        return "segmented(" + std::to_string(theta1) + "," + std::to_string(theta2) + ")";
      default: return to_string(kind);
    }
  }
};

/// Problem-size independent description; segmented boundaries default to floor(n/100), floor(n/50).
struct NoiseModelSpec {
  NoiseKind kind = NoiseKind::none;
  Fraction p{0};
  std::optional<std::size_t> theta1;
  std::optional<std::size_t> theta2;
  bool faithful = false;

  static NoiseModelSpec none() { return {}; }
  static NoiseModelSpec one_bit(Fraction p) {
    NoiseModelSpec s;
    s.kind = NoiseKind::one_bit;
    s.p = p;
    return s;
  }
  static NoiseModelSpec segmented(std::optional<std::size_t> t1 = {}, std::optional<std::size_t> t2 = {},
                                  bool faithful = false) {
    NoiseModelSpec s;
    s.kind = NoiseKind::segmented;
    s.theta1 = t1;
    s.theta2 = t2;
    s.faithful = faithful;
    return s;
  }
  static NoiseModelSpec partial() {
    NoiseModelSpec s;
    s.kind = NoiseKind::partial;
    return s;
  }

  [[nodiscard]] NoiseModel resolve(std::size_t n) const {
    if (n == 0) throw UsageError("noise model: n must be >= 1");
    NoiseModel m;
    m.kind = kind;
    m.n = n;
    switch (kind) {
      case NoiseKind::none:
      case NoiseKind::partial: break;
      case NoiseKind::one_bit:
        if (p < Fraction(0) || p > Fraction(1)) throw UsageError("one-bit noise: p must lie in [0,1]");
        m.p = p;
        break;
      case NoiseKind::segmented: {
        if (faithful) {
          if (n % 100 != 0) throw UsageError("segmented noise (faithful): n must be a multiple of 100");
          if ((theta1 && *theta1 != n / 100) || (theta2 && *theta2 != n / 50))
            throw UsageError("segmented noise (faithful): boundaries must be n/100 and n/50");
        }
        if (n < 2) throw UsageError("segmented noise requires n >= 2");
        m.theta1 = theta1.value_or(n / 100);
        m.theta2 = theta2.value_or(n / 50);
        if (!(m.theta1 < m.theta2 && m.theta2 <= n))
          throw UsageError("segmented noise: need 0 <= theta1 < theta2 <= n (got " + std::to_string(m.theta1) +
                           ", " + std::to_string(m.theta2) + " at n=" + std::to_string(n) + ")");
        if (m.theta1 == 0)
          m.warnings.push_back("segmented noise: theta1 = 0, the outlier segment holds only the optimum");
        break;
      }
    }
    return m;
  }
};

inline void to_json(nlohmann::json& j, const NoiseModelSpec& s) {
  j = nlohmann::json{{"kind", to_string(s.kind)}};
  if (s.kind == NoiseKind::one_bit) {
    const double approx = static_cast<double>(s.p.to_real());
    if (Fraction::from_decimal_double(approx) == s.p)
      j["p"] = approx;
    else
      j["p"] = s.p.str();
  }
  if (s.kind == NoiseKind::segmented) {
    if (s.theta1) j["theta1"] = *s.theta1;
    if (s.theta2) j["theta2"] = *s.theta2;
    j["faithful"] = s.faithful;
  }
}

inline Fraction fraction_from_json(const nlohmann::json& j, const char* what) {
  if (j.is_number_integer()) return Fraction(j.get<std::int64_t>());
  if (j.is_number()) return Fraction::from_decimal_double(j.get<double>());
  if (j.is_string()) return Fraction::parse(j.get<std::string>());
  throw UsageError(std::string(what) + ": expected a number or \"num/den\" string");
}

inline void from_json(const nlohmann::json& j, NoiseModelSpec& s) {
  if (!j.is_object() || !j.contains("kind")) throw UsageError("noise spec: expected object with \"kind\"");
  s = NoiseModelSpec{};
  s.kind = parse_noise_kind(j.at("kind").get<std::string>());
  if (s.kind == NoiseKind::one_bit) {
    if (!j.contains("p")) throw UsageError("one-bit noise: missing \"p\"");
    s.p = fraction_from_json(j.at("p"), "p");
    if (s.p < Fraction(0) || s.p > Fraction(1)) throw UsageError("one-bit noise: p must lie in [0,1]");
  }
  if (s.kind == NoiseKind::segmented) {
    if (j.contains("theta1")) s.theta1 = j.at("theta1").get<std::size_t>();
    if (j.contains("theta2")) s.theta2 = j.at("theta2").get<std::size_t>();
    s.faithful = j.value("faithful", false);
  }
}

// ---------------------------------------------------------------------------
// Exact per-state laws of the noisy fitness. `i` is the zero count.

template <Probability P>
DiscreteDistribution<P> onebit_pmf(std::size_t n, std::size_t i, const Fraction& p) {
  if (i > n) throw UsageError("onebit_pmf: zero count exceeds n");
  const auto N = static_cast<std::int64_t>(n);
  const auto I = static_cast<std::int64_t>(i);
  const Fraction down = p * Fraction(N - I, N);
  const Fraction up = p * Fraction(I, N);
  std::vector<Atom<P>> atoms;
  if (N - I - 1 >= 0) atoms.push_back({Value(N - I - 1), from_fraction<P>(down)});
  atoms.push_back({Value(N - I), from_fraction<P>(Fraction(1) - p)});
  atoms.push_back({Value(N - I + 1), from_fraction<P>(up)});
  return DiscreteDistribution<P>::from_sorted(std::move(atoms));
}

template <Probability P>
DiscreteDistribution<P> segmented_pmf(std::size_t n, std::size_t i, std::size_t theta1, std::size_t theta2) {
  if (i > n) throw UsageError("segmented_pmf: zero count exceeds n");
  const auto N = static_cast<std::int64_t>(n);
  const auto I = static_cast<std::int64_t>(i);
  if (i > theta2) return DiscreteDistribution<P>::point(Value(N - I));
  if (i > theta1) {
    return DiscreteDistribution<P>::from_sorted({{Value(N - I), from_fraction<P>(Fraction(N + 2, 2 * N))},
                                                 {Value(3 * N + I), from_fraction<P>(Fraction(N - 2, 2 * N))}});
  }
  const std::int64_t base = 2 * N + I;
  return DiscreteDistribution<P>::from_sorted({{Value(4 * N * (N - I)), from_fraction<P>(Fraction(N - 1, N))},
                                               {Value(base * base * base), from_fraction<P>(Fraction(1, N))}});
}

template <Probability P>
DiscreteDistribution<P> partial_pmf(std::size_t n, std::size_t i) {
  if (i > n) throw UsageError("partial_pmf: zero count exceeds n");
  const auto N = static_cast<std::int64_t>(n);
  const auto I = static_cast<std::int64_t>(i);
  if (2 * i >= n) return DiscreteDistribution<P>::point(Value(N - I));
  return DiscreteDistribution<P>::from_sorted(
      {{Value(I, 2), from_fraction<P>(Fraction(2, 3))}, {Value(2 * (N - I)), from_fraction<P>(Fraction(1, 3))}});
}

template <Probability P>
DiscreteDistribution<P> noise_pmf(const NoiseModel& model, std::size_t i) {
  switch (model.kind) {
    case NoiseKind::none:
      if (i > model.n) throw UsageError("noise_pmf: zero count exceeds n");
      return DiscreteDistribution<P>::point(Value(static_cast<std::int64_t>(model.n - i)));
    case NoiseKind::one_bit: return onebit_pmf<P>(model.n, i, model.p);
    case NoiseKind::segmented: return segmented_pmf<P>(model.n, i, model.theta1, model.theta2);
    case NoiseKind::partial: return partial_pmf<P>(model.n, i);
  }
  throw UsageError("noise_pmf: unknown kind");
}

// ---------------------------------------------------------------------------
// Samplers. All probabilities are sampled exactly from their rational form.

namespace detail {

inline bool coin(RandomStream& rng, const Fraction& f) {
  return bernoulli(rng, static_cast<std::uint64_t>(f.num()), static_cast<std::uint64_t>(f.den()));
}

// `flipped_bit_was_zero` is only consulted for one-bit noise when the coin fires.
template <class FlipProbe>
Value draw(const NoiseModel& m, std::size_t i, RandomStream& rng, FlipProbe&& flipped_bit_was_zero) {
  const auto N = static_cast<std::int64_t>(m.n);
  const auto I = static_cast<std::int64_t>(i);
  switch (m.kind) {
    case NoiseKind::none: return Value(N - I);
    case NoiseKind::one_bit:
      if (!coin(rng, m.p)) return Value(N - I);
      return Value(flipped_bit_was_zero() ? N - I + 1 : N - I - 1);
    case NoiseKind::segmented:
      if (i > m.theta2) return Value(N - I);
      if (i > m.theta1)
        return bernoulli(rng, static_cast<std::uint64_t>(N + 2), static_cast<std::uint64_t>(2 * N)) ? Value(N - I)
                                                                                                     : Value(3 * N + I);
      if (bernoulli(rng, static_cast<std::uint64_t>(N - 1), static_cast<std::uint64_t>(N))) return Value(4 * N * (N - I));
      return Value((2 * N + I) * (2 * N + I) * (2 * N + I));
    case NoiseKind::partial:
      if (2 * i >= m.n) return Value(N - I);
      return bernoulli(rng, 2, 3) ? Value::half(I) : Value(2 * (N - I));
  }
  return Value(N - I);
}

}  // namespace detail

/// One noisy evaluation of a solution with `i` 0-bits; the flipped bit is drawn uniformly per evaluation.
inline Value noisy_sample(const NoiseModel& model, std::size_t i, RandomStream& rng) {
  return detail::draw(model, i, rng, [&] { return uniform_below(rng, model.n) < i; });
}

/// One noisy evaluation of a concrete bit string. `zeros` must equal x.zero_count().
inline Value noisy_sample(const NoiseModel& model, const Solution& x, std::size_t zeros, RandomStream& rng) {
  return detail::draw(model, zeros, rng, [&] { return x[uniform_below(rng, x.n())] == 0; });
}

inline Value noisy_sample(const NoiseModel& model, const Solution& x, RandomStream& rng) {
  return noisy_sample(model, x, x.zero_count(), rng);
}

}  // namespace medsamp
