#pragma once

#include "lodin/search.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lodin {

/// Generator for run `run` of a seeded experiment. Independent of how runs
/// are spread over threads.
Rng run_rng(std::uint64_t seed, std::uint64_t run);

struct RunResult {
  bool satisfied = false;
  std::uint64_t first_hit = 0; // step index of the first satisfying state
  double log_prob = 0.0;       // log P(ω) of the steps taken
};

/// One random run of `step_bound` steps; satisfied when some state
/// ω[0..step_bound] satisfies p. Stops at the first hit.
RunResult simulate_run(const ExplicitEngine& e, const props::Prop& p, std::uint64_t step_bound,
                       Rng& rng);

/// Runs first..first+count-1, one after the other. Reference implementation.
std::vector<RunResult> simulate_batch_serial(const ExplicitEngine& e, const props::Prop& p,
                                             std::uint64_t step_bound, std::uint64_t seed,
                                             std::uint64_t first, std::uint64_t count);

/// Same result as simulate_batch_serial, with runs spread over OpenMP threads.
std::vector<RunResult> simulate_batch(const ExplicitEngine& e, const props::Prop& p,
                                      std::uint64_t step_bound, std::uint64_t seed,
                                      std::uint64_t first, std::uint64_t count);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double confidence = 0.95;
  double width() const { return hi - lo; }
};

/// Binomial CDF P(Bin(m, psi) <= x).
double binomial_cdf(std::uint64_t x, std::uint64_t m, double psi);

/// Exact Clopper-Pearson interval for x successes in m trials, by bisection.
Interval clopper_pearson(std::uint64_t x, std::uint64_t m, double alpha);

struct RunStats {
  std::uint64_t total = 0;
  std::uint64_t satisfying = 0;
  std::map<std::uint64_t, std::uint64_t> first_hits; // step -> runs

  void add(const RunResult& r);
};

inline constexpr std::uint64_t kBatchSize = 64;

struct SimConfig {
  std::uint64_t seed = 0;
  std::uint64_t max_runs = 10'000'000;
  std::uint64_t max_time_ms = 3'600'000;
  bool parallel = true;
};

struct EstimateResult {
  Interval interval;
  RunStats stats;
  bool complete = true;
  std::string reason;
};

/// Samples batches of runs until the Clopper-Pearson interval is at most
/// epsilon wide.
EstimateResult estimate_probability(const ExplicitEngine& e, const props::Prop& p,
                                    std::uint64_t step_bound, double alpha, double epsilon,
                                    const SimConfig& cfg);

enum class SprtDecision : std::uint8_t { Accept, Reject, Inconclusive };

const char* sprt_name(SprtDecision d);

struct SprtResult {
  SprtDecision decision = SprtDecision::Inconclusive;
  RunStats stats;
  double ratio = 0.0; // final log-likelihood sum r
  std::string reason;
};

/// Wald's test of Pr >= theta+delta (accept) against Pr < theta-delta (reject).
/// `next` yields one more run, or nullopt when sampling must stop.
template <class NextRun>
SprtResult sprt(NextRun&& next, double theta, double alpha, double beta, double delta,
                std::uint64_t max_runs);

/// Sequential test driven by simulated runs.
SprtResult sprt_test(const ExplicitEngine& e, const props::Prop& p, std::uint64_t step_bound,
                     double theta, double alpha, double beta, double delta, const SimConfig& cfg);

void check_sprt_parameters(double theta, double alpha, double beta, double delta);

template <class NextRun>
SprtResult sprt(NextRun&& next, double theta, double alpha, double beta, double delta,
                std::uint64_t max_runs) {
  check_sprt_parameters(theta, alpha, beta, delta);
  const double p0 = theta + delta, p1 = theta - delta;
  const double up = std::log(p1 / p0), down = std::log((1 - p1) / (1 - p0));
  const double accept = std::log(beta / (1 - alpha)), reject = std::log((1 - beta) / alpha);
  SprtResult out;
  while (out.stats.total < max_runs) {
    const std::optional<RunResult> r = next();
    if (!r) {
      out.reason = "time limit reached";
      return out;
    }
    out.stats.add(*r);
    out.ratio += r->satisfied ? up : down;
    if (out.ratio <= accept) {
      out.decision = SprtDecision::Accept;
      return out;
    }
    if (out.ratio >= reject) {
      out.decision = SprtDecision::Reject;
      return out;
    }
  }
  out.reason = "run limit of " + std::to_string(max_runs) + " reached";
  return out;
}

} // namespace lodin
