#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "medsamp/drift.hpp"
#include "medsamp/estimators.hpp"
#include "medsamp/fitness.hpp"
#include "medsamp/noise.hpp"
#include "medsamp/parallel.hpp"
#include "medsamp/random.hpp"

namespace medsamp {

inline constexpr std::uint64_t kDefaultBudget = 1'000'000'000;

/// One accept/reject step, reported to an optional observer.
struct StepEvent {
  std::uint64_t iteration = 0;
  std::size_t parent_zeros = 0;
  std::size_t offspring_zeros = 0;
  Value parent_estimate;
  Value offspring_estimate;
  bool accepted = false;
  bool offspring_equals_parent = false;  // bit-identical strings
  const Solution* parent = nullptr;
  const Solution* offspring = nullptr;
};

struct RunConfig {
  std::size_t n = 1;
  NoiseModelSpec noise;
  EstimatorSpec estimator;
  std::uint64_t max_evaluations = kDefaultBudget;
  std::uint64_t seed = 0;
  std::optional<std::size_t> start_zeros;  // uniform random start when empty
  std::function<void(const StepEvent&)> observer;
};

struct RunRecord {
  std::uint64_t seed = 0;
  bool hit = false;
  std::uint64_t iterations = 0;
  std::uint64_t evaluations = 0;
  std::size_t final_zero_count = 0;
  // Iteration at which 1^n was first generated as an offspring, accepted or not.
  std::optional<std::uint64_t> first_optimal_offspring;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

namespace detail {

inline RunRecord run_resolved(const RunConfig& cfg, const NoiseModel& noise, const Estimator& est) {
  if (cfg.max_evaluations < est.m) throw UsageError("run: budget smaller than one estimate");
  RandomStream rng(cfg.seed);
  RunRecord rec;
  rec.seed = cfg.seed;
  Solution x = cfg.start_zeros ? Solution::with_zero_count(cfg.n, *cfg.start_zeros, rng) : Solution::uniform(cfg.n, rng);
  std::size_t zeros = x.zero_count();
  rec.evaluations = est.m;
  std::vector<Value> scratch;
  const std::uint64_t per_iteration = 2 * est.m;
  while (zeros != 0) {
    if (rec.evaluations >= cfg.max_evaluations) break;
    Solution y = mutate(x, rng);
    const std::size_t y_zeros = y.zero_count();
    const Value fy = sample_estimate(est, noise, y, y_zeros, rng, scratch);
    const Value fx = sample_estimate(est, noise, x, zeros, rng, scratch);
    ++rec.iterations;
    rec.evaluations += per_iteration;
    if (y_zeros == 0 && !rec.first_optimal_offspring) rec.first_optimal_offspring = rec.iterations;
    const bool accepted = fy >= fx;
    if (cfg.observer) cfg.observer({rec.iterations, zeros, y_zeros, fx, fy, accepted, y == x, &x, &y});
    if (accepted) {
      x = std::move(y);
      zeros = y_zeros;
    }
  }
  rec.hit = zeros == 0;
  rec.final_zero_count = zeros;
  return rec;
}

}  // namespace detail

/// One run of the (1+1)-EA with re-evaluation on full bit strings.
inline RunRecord run_once(const RunConfig& cfg) {
  return detail::run_resolved(cfg, cfg.noise.resolve(cfg.n), cfg.estimator.resolve(cfg.n));
}

struct SampleStats {
  std::size_t count = 0;
  Real mean = 0.0L, standard_error = 0.0L, median = 0.0L, q05 = 0.0L, q95 = 0.0L;
};

/// Linear-interpolation quantile of sorted data.
inline Real sorted_quantile(const std::vector<Real>& sorted, Real q) {
  if (sorted.empty()) return std::numeric_limits<Real>::quiet_NaN();
  const Real pos = q * static_cast<Real>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<Real>(lo)) * (sorted[hi] - sorted[lo]);
}

inline SampleStats summarize(std::vector<Real> xs) {
  SampleStats s;
  s.count = xs.size();
  if (xs.empty()) return s;
  CompensatedSum sum;
  for (Real x : xs) sum.add(x);
  s.mean = sum.value() / static_cast<Real>(xs.size());
  if (xs.size() > 1) {
    CompensatedSum sq;
    for (Real x : xs) sq.add((x - s.mean) * (x - s.mean));
    s.standard_error = std::sqrt(sq.value() / static_cast<Real>(xs.size() - 1) / static_cast<Real>(xs.size()));
  }
  std::sort(xs.begin(), xs.end());
  s.median = sorted_quantile(xs, 0.5L);
  s.q05 = sorted_quantile(xs, 0.05L);
  s.q95 = sorted_quantile(xs, 0.95L);
  return s;
}

struct RunSummary {
  std::size_t replicates = 0;
  std::size_t hits = 0;
  std::size_t truncated = 0;
  Real success_rate = 0.0L;
  SampleStats iterations;   // over hit runs
  SampleStats evaluations;  // over hit runs
  bool comparable = true;   // no truncation, so the mean is comparable to an exact EFHT
  std::vector<RunRecord> records;  // by replicate index
};

/// Replicate r uses seed derive_seed(cfg.seed, r); results do not depend on `threads`.
inline RunSummary run_many(const RunConfig& cfg, std::size_t replicates, unsigned threads = 1) {
  if (replicates < 1) throw UsageError("run_many: replicates must be >= 1");
  const NoiseModel noise = cfg.noise.resolve(cfg.n);
  const Estimator est = cfg.estimator.resolve(cfg.n);
  RunSummary s;
  s.replicates = replicates;
  s.records.resize(replicates);
  parallel_for(replicates, threads, [&](std::size_t r) {
    RunConfig local = cfg;
    local.seed = derive_seed(cfg.seed, r);
    s.records[r] = detail::run_resolved(local, noise, est);
  });
  std::vector<Real> its, evals;
  for (const auto& rec : s.records) {
    if (rec.hit) {
      ++s.hits;
      its.push_back(static_cast<Real>(rec.iterations));
      evals.push_back(static_cast<Real>(rec.evaluations));
    } else {
      ++s.truncated;
    }
  }
  s.success_rate = static_cast<Real>(s.hits) / static_cast<Real>(replicates);
  s.iterations = summarize(std::move(its));
  s.evaluations = summarize(std::move(evals));
  s.comparable = s.truncated == 0;
  return s;
}

struct DriftEstimate {
  Real mean = 0.0L;
  Real standard_error = 0.0L;
  std::size_t trials = 0;
};

/// Monte Carlo one-step drift V(i) - V(next) from random solutions with i 0-bits.
inline DriftEstimate empirical_drift(const RunConfig& cfg, std::size_t i, const DistanceFunction& df, std::size_t trials) {
  if (trials < 1) throw UsageError("empirical_drift: trials must be >= 1");
  if (i > cfg.n) throw UsageError("empirical_drift: state exceeds n");
  if (df.n() != cfg.n) throw UsageError("empirical_drift: distance function built for a different n");
  const NoiseModel noise = cfg.noise.resolve(cfg.n);
  const Estimator est = cfg.estimator.resolve(cfg.n);
  RandomStream rng(cfg.seed);
  std::vector<Value> scratch;
  std::vector<Real> samples;
  samples.reserve(trials);
  const Real vi = df(i).to_real();
  for (std::size_t t = 0; t < trials; ++t) {
    const Solution x = Solution::with_zero_count(cfg.n, i, rng);
    const Solution y = mutate(x, rng);
    const std::size_t yz = y.zero_count();
    const Value fy = sample_estimate(est, noise, y, yz, rng, scratch);
    const Value fx = sample_estimate(est, noise, x, i, rng, scratch);
    const std::size_t next = fy >= fx ? yz : i;
    samples.push_back(vi - df(next).to_real());
  }
  const auto st = summarize(std::move(samples));
  return {st.mean, st.standard_error, trials};
}

inline nlohmann::json to_json(const SampleStats& s) {
  return {{"count", s.count},
          {"mean", static_cast<double>(s.mean)},
          {"standard_error", static_cast<double>(s.standard_error)},
          {"median", static_cast<double>(s.median)},
          {"q05", static_cast<double>(s.q05)},
          {"q95", static_cast<double>(s.q95)}};
}

inline nlohmann::json to_json(const RunSummary& s) {
  return {{"replicates", s.replicates},      {"hits", s.hits},
          {"truncated", s.truncated},        {"success_rate", static_cast<double>(s.success_rate)},
          {"comparable", s.comparable},      {"iterations", to_json(s.iterations)},
          {"evaluations", to_json(s.evaluations)}};
}

/// CSV columns: replicate, seed, hit, iterations, evaluations, final_zero_count.
inline void write_records_csv(std::ostream& os, const std::vector<RunRecord>& records) {
  os << "replicate,seed,hit,iterations,evaluations,final_zero_count\n";
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    os << r << ',' << rec.seed << ',' << (rec.hit ? 1 : 0) << ',' << rec.iterations << ',' << rec.evaluations << ','
       << rec.final_zero_count << '\n';
  }
}

}  // namespace medsamp
