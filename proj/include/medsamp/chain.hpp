#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <vector>

#include "medsamp/estimators.hpp"
#include "medsamp/fitness.hpp"
#include "medsamp/noise.hpp"
#include "medsamp/parallel.hpp"

namespace medsamp {

/*
 * Zero-count projection of the (1+1)-EA with re-evaluation.
 *
 * laws[i]        law of the estimate of a solution with i 0-bits
 * accept(i, j)   P(estimate of offspring j >= estimate of parent i)
 * transition     T(i, j) = kernel(i, j) * accept(i, j) off the diagonal, state 0 absorbing
 */
template <Probability P>
struct LumpedChain {
  std::size_t n = 0;
  NoiseModel noise;
  Estimator estimator;
  MutationKernel<P> kernel;
  std::vector<DiscreteDistribution<P>> laws;
  Matrix<P> accept;
  Matrix<P> transition;

  [[nodiscard]] std::size_t states() const { return n + 1; }
};

/// Per-state estimator laws, computed in parallel.
template <Probability P>
std::vector<DiscreteDistribution<P>> estimator_laws(const NoiseModel& noise, const Estimator& est, unsigned threads = 1) {
  std::vector<DiscreteDistribution<P>> laws(noise.n + 1);
  parallel_for(laws.size(), threads,
               [&](std::size_t i) { laws[i] = estimator_distribution(est, noise_pmf<P>(noise, i)); });
  return laws;
}

template <Probability P>
LumpedChain<P> build_chain(const NoiseModel& noise, const Estimator& est, unsigned threads = 1) {
  const std::size_t n = noise.n;
  LumpedChain<P> c;
  c.n = n;
  c.noise = noise;
  c.estimator = est;
  c.laws = estimator_laws<P>(noise, est, threads);
  c.kernel = mutation_kernel<P>(n);
  c.accept = Matrix<P>(n + 1, from_int<P>(0));
  c.transition = Matrix<P>(n + 1, from_int<P>(0));
  parallel_for(n + 1, threads, [&](std::size_t i) {
    for (std::size_t j = 0; j <= n; ++j) c.accept(i, j) = accept_probability(c.laws[i], c.laws[j]);
  });
  c.transition(0, 0) = from_int<P>(1);
  for (std::size_t i = 1; i <= n; ++i) {
    P off = from_int<P>(0);
    for (std::size_t j = 0; j <= n; ++j) {
      if (j == i) continue;
      c.transition(i, j) = c.kernel(i, j) * c.accept(i, j);
      off += c.transition(i, j);
    }
    c.transition(i, i) = from_int<P>(1) - off;
  }
  return c;
}

template <Probability P>
LumpedChain<P> build_chain(std::size_t n, const NoiseModelSpec& noise, const EstimatorSpec& est, unsigned threads = 1) {
  return build_chain<P>(noise.resolve(n), est.resolve(n), threads);
}

/// P(estimate of x^a < estimate of x^b), ties excluded.
template <Probability P>
P comparison_less(const LumpedChain<P>& c, std::size_t a, std::size_t b) {
  return accept_probability_strict(c.laws[a], c.laws[b]);
}

/// Largest |1 - row sum| of the transition matrix.
template <Probability P>
Real stochasticity_defect(const LumpedChain<P>& c) {
  Real worst = 0.0L;
  for (std::size_t i = 0; i <= c.n; ++i) {
    P s = from_int<P>(0);
    for (std::size_t j = 0; j <= c.n; ++j) s += c.transition(i, j);
    worst = std::max(worst, std::fabs(to_real(s) - 1.0L));
  }
  return worst;
}

template <Probability P>
nlohmann::json to_json(const LumpedChain<P>& c) {
  auto matrix = [&](const Matrix<P>& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t j = 0; j < m.size(); ++j) row.push_back(static_cast<double>(to_real(m(i, j))));
      rows.push_back(std::move(row));
    }
    return rows;
  };
  return {{"n", c.n},
          {"noise", c.noise.label()},
          {"estimator", c.estimator.label()},
          {"accept", matrix(c.accept)},
          {"transition", matrix(c.transition)}};
}

}  // namespace medsamp
