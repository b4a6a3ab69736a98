#include <catch2/catch_amalgamated.hpp>

#include "medsamp/medsamp.hpp"
#include "oracles.hpp"

using namespace medsamp;

namespace {

std::vector<int> bits_with_zeros(std::size_t n, std::size_t zeros) {
  std::vector<int> b(n, 1);
  for (std::size_t k = 0; k < zeros; ++k) b[k] = 0;
  return b;
}

}  // namespace

TEST_CASE("one-bit pmf") {
  const auto d = onebit_pmf<Exact>(4, 1, Fraction(1));
  CHECK(d.prob_of(Value(2)) == Exact(3, 4));
  CHECK(d.prob_of(Value(4)) == Exact(1, 4));
  CHECK(d.prob_of(Value(3)) == 0);
  const auto e = onebit_pmf<Exact>(10, 0, Fraction(1, 2));
  CHECK(e.prob_of(Value(10)) == Exact(1, 2));
  CHECK(e.prob_of(Value(9)) == Exact(1, 2));
  CHECK(onebit_pmf<Exact>(5, 2, Fraction(0)) == DiscreteDistribution<Exact>::point(Value(3)));
}

TEST_CASE("segmented pmf") {
  const auto a = segmented_pmf<Exact>(100, 2, 1, 2);
  CHECK(a.prob_of(Value(98)) == Exact(51, 100));
  CHECK(a.prob_of(Value(302)) == Exact(49, 100));
  const auto b = segmented_pmf<Exact>(100, 1, 1, 2);
  CHECK(b.prob_of(Value(39600)) == Exact(99, 100));
  CHECK(b.prob_of(Value(201 * 201 * 201)) == Exact(1, 100));
  CHECK(segmented_pmf<Exact>(100, 3, 1, 2) == DiscreteDistribution<Exact>::point(Value(97)));
}

TEST_CASE("partial pmf") {
  const auto a = partial_pmf<Exact>(10, 4);
  CHECK(a.prob_of(Value(2)) == Exact(2, 3));
  CHECK(a.prob_of(Value(12)) == Exact(1, 3));
  CHECK(partial_pmf<Exact>(10, 5) == DiscreteDistribution<Exact>::point(Value(5)));
  CHECK(partial_pmf<Exact>(10, 3).prob_of(Value(3, 2)) == Exact(2, 3));
}

TEST_CASE("pmfs match the per-string definitions for every state") {
  for (std::size_t n : {2u, 3u, 6u, 10u, 20u}) {
    std::vector<NoiseModel> models = {NoiseModelSpec::none().resolve(n),
                                      NoiseModelSpec::one_bit(Fraction(1, 3)).resolve(n),
                                      NoiseModelSpec::one_bit(Fraction(1)).resolve(n),
                                      NoiseModelSpec::segmented(0, 1).resolve(n),
                                      NoiseModelSpec::segmented(1, 2).resolve(n),
                                      NoiseModelSpec::partial().resolve(n)};
    for (const auto& m : models)
      for (std::size_t i = 0; i <= n; ++i) {
        const auto d = noise_pmf<Exact>(m, i);
        CHECK(is_normalized(d));
        CHECK(oracle::as_map(d) == oracle::noisy_law(m, bits_with_zeros(n, i)));
      }
  }
}

TEST_CASE("noise spec validation") {
  CHECK_THROWS_AS(NoiseModelSpec::one_bit(Fraction(3, 2)).resolve(10), UsageError);
  CHECK_THROWS_AS(NoiseModelSpec::segmented({}, {}, true).resolve(150), UsageError);
  CHECK_THROWS_AS(NoiseModelSpec::segmented(3, 2).resolve(10), UsageError);
  const auto f = NoiseModelSpec::segmented({}, {}, true).resolve(200);
  CHECK(f.theta1 == 2);
  CHECK(f.theta2 == 4);
  const auto w = NoiseModelSpec::segmented().resolve(60);
  CHECK(w.theta1 == 0);
  CHECK(w.theta2 == 1);
  CHECK(w.warnings.size() == 1);
}

TEST_CASE("noise spec json round trip") {
  for (const auto& s : {NoiseModelSpec::none(), NoiseModelSpec::one_bit(Fraction(3, 5)),
                        NoiseModelSpec::one_bit(Fraction(1, 3)), NoiseModelSpec::segmented(1, 2),
                        NoiseModelSpec::segmented({}, {}, true), NoiseModelSpec::partial()}) {
    nlohmann::json j = s;
    const auto back = j.get<NoiseModelSpec>();
    CHECK(back.kind == s.kind);
    CHECK(back.p == s.p);
    CHECK(back.theta1 == s.theta1);
    CHECK(back.theta2 == s.theta2);
    CHECK(back.faithful == s.faithful);
  }
  CHECK(nlohmann::json::parse(R"({"kind":"one-bit","p":0.6})").get<NoiseModelSpec>().p == Fraction(3, 5));
  CHECK(nlohmann::json::parse(R"({"kind":"one-bit","p":"1/3"})").get<NoiseModelSpec>().p == Fraction(1, 3));
  CHECK_THROWS_AS(nlohmann::json::parse(R"({"kind":"loud"})").get<NoiseModelSpec>(), UsageError);
}

TEST_CASE("samplers follow the pmfs") {
  const int trials = 100000;
  RandomStream rng(5);
  const std::size_t n = 10;
  std::vector<NoiseModel> models = {NoiseModelSpec::one_bit(Fraction(1, 2)).resolve(n),
                                    NoiseModelSpec::segmented(1, 3).resolve(n), NoiseModelSpec::partial().resolve(n)};
  for (const auto& m : models)
    for (std::size_t i : {1u, 3u, 4u}) {
      const auto d = noise_pmf<Real>(m, i);
      const auto x = Solution::with_zero_count(n, i, rng);
      std::map<Value, int> by_state, by_string;
      for (int t = 0; t < trials; ++t) {
        ++by_state[noisy_sample(m, i, rng)];
        ++by_string[noisy_sample(m, x, rng)];
      }
      for (const auto& a : d.atoms()) {
        const double p = static_cast<double>(a.prob);
        const double se = std::sqrt(p * (1 - p) / trials);
        CHECK(std::fabs(by_state[a.value] / double(trials) - p) <= 4 * se + 1e-12);
        CHECK(std::fabs(by_string[a.value] / double(trials) - p) <= 4 * se + 1e-12);
      }
      CHECK(by_state.size() == d.size());
    }
}

TEST_CASE("noise-free sampling is exact") {
  RandomStream rng(1);
  const auto m = NoiseModelSpec::none().resolve(6);
  for (int t = 0; t < 100; ++t) CHECK(noisy_sample(m, 2, rng) == Value(4));
}
