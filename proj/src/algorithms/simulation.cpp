#include "lodin/simulation.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <chrono>
#include <stdexcept>

namespace lodin {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr double kBisectTol = 1e-7;

/// Root of a monotone f on [0,1] where f(lo_end) and f(hi_end) straddle the target.
template <class F>
double bisect(F&& above, double lo, double hi) {
  // above(x) is true on [lo, root) and false on (root, hi]
  while (hi - lo > kBisectTol) {
    const double mid = 0.5 * (lo + hi);
    if (above(mid))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace

Rng run_rng(std::uint64_t seed, std::uint64_t run) {
  return Rng(splitmix64(splitmix64(seed) ^ run));
}

RunResult simulate_run(const ExplicitEngine& e, const props::Prop& p, std::uint64_t step_bound,
                       Rng& rng) {
  const props::Evaluator ev(e);
  RunResult r;
  ExplicitNetState s = e.initial();
  if (ev.eval(p, s)) {
    r.satisfied = true;
    return r;
  }
  for (std::uint64_t k = 1; k <= step_bound; ++k) {
    if (s.is_error())
      break; // absorbing, so no later state differs
    r.log_prob += e.sample_step(s, rng);
    if (ev.eval(p, s)) {
      r.satisfied = true;
      r.first_hit = k;
      break;
    }
  }
  return r;
}

std::vector<RunResult> simulate_batch_serial(const ExplicitEngine& e, const props::Prop& p,
                                             std::uint64_t step_bound, std::uint64_t seed,
                                             std::uint64_t first, std::uint64_t count) {
  std::vector<RunResult> out(count);
  for (std::uint64_t k = 0; k < count; ++k) {
    Rng rng = run_rng(seed, first + k);
    out[k] = simulate_run(e, p, step_bound, rng);
  }
  return out;
}

std::vector<RunResult> simulate_batch(const ExplicitEngine& e, const props::Prop& p,
                                      std::uint64_t step_bound, std::uint64_t seed,
                                      std::uint64_t first, std::uint64_t count) {
  std::vector<RunResult> out(count);
  const auto n = static_cast<std::int64_t>(count);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t k = 0; k < n; ++k) {
    try {
      Rng rng = run_rng(seed, first + static_cast<std::uint64_t>(k));
      out[static_cast<std::size_t>(k)] = simulate_run(e, p, step_bound, rng);
    } catch (...) {
#pragma omp critical(lodin_sim_failure)
      if (!failure)
        failure = std::current_exception();
    }
  }
  if (failure)
    std::rethrow_exception(failure);
  return out;
}

double binomial_cdf(std::uint64_t x, std::uint64_t m, double psi) {
  if (x >= m || psi <= 0.0)
    return 1.0;
  if (psi >= 1.0)
    return 0.0;
  // P(Bin <= x) = 1 - I_psi(x+1, m-x)
  return boost::math::ibetac(static_cast<double>(x + 1), static_cast<double>(m - x), psi);
}

Interval clopper_pearson(std::uint64_t x, std::uint64_t m, double alpha) {
  if (m == 0 || x > m)
    throw std::invalid_argument("clopper_pearson: need 0 <= successes <= trials and trials > 0");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("clopper_pearson: alpha must lie in (0,1)");
  Interval iv;
  iv.confidence = 1.0 - alpha;
  const double half = alpha / 2;
  // hi = sup { psi | P(Bin <= x) > alpha/2 }
  iv.hi = x == m ? 1.0 : bisect([&](double psi) { return binomial_cdf(x, m, psi) > half; }, 0.0, 1.0);
  // lo = inf { psi | P(Bin >= x) > alpha/2 }
  iv.lo = x == 0 ? 0.0
                 : bisect([&](double psi) { return 1.0 - binomial_cdf(x - 1, m, psi) <= half; },
                          0.0, 1.0);
  return iv;
}

void RunStats::add(const RunResult& r) {
  ++total;
  if (r.satisfied) {
    ++satisfying;
    ++first_hits[r.first_hit];
  }
}

EstimateResult estimate_probability(const ExplicitEngine& e, const props::Prop& p,
                                    std::uint64_t step_bound, double alpha, double epsilon,
                                    const SimConfig& cfg) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("epsilon must lie in (0,1)");
  const auto start = std::chrono::steady_clock::now();
  EstimateResult res;
  for (;;) {
    const auto n = std::min(kBatchSize, cfg.max_runs - res.stats.total);
    const auto batch = cfg.parallel ? simulate_batch(e, p, step_bound, cfg.seed, res.stats.total, n)
                                    : simulate_batch_serial(e, p, step_bound, cfg.seed, res.stats.total, n);
    for (const auto& r : batch)
      res.stats.add(r);
    res.interval = clopper_pearson(res.stats.satisfying, res.stats.total, alpha);
    if (res.interval.width() <= epsilon)
      return res;
    if (res.stats.total >= cfg.max_runs) {
      res.complete = false;
      res.reason = "run limit of " + std::to_string(cfg.max_runs) + " reached";
      return res;
    }
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    if (static_cast<std::uint64_t>(ms.count()) > cfg.max_time_ms) {
      res.complete = false;
      res.reason = "time limit of " + std::to_string(cfg.max_time_ms) + " ms reached";
      return res;
    }
  }
}

const char* sprt_name(SprtDecision d) {
  switch (d) {
  case SprtDecision::Accept:
    return "Accepted";
  case SprtDecision::Reject:
    return "Rejected";
  case SprtDecision::Inconclusive:
    return "Inconclusive";
  }
  return "?";
}

void check_sprt_parameters(double theta, double alpha, double beta, double delta) {
  if (!(theta - delta > 0.0 && theta + delta < 1.0))
    throw std::invalid_argument("indifference region [theta-delta, theta+delta] must lie inside (0,1)");
  if (!(delta > 0.0))
    throw std::invalid_argument("delta must be positive");
  if (!(alpha > 0.0 && alpha < 1.0 && beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("alpha and beta must lie in (0,1)");
}

SprtResult sprt_test(const ExplicitEngine& e, const props::Prop& p, std::uint64_t step_bound,
                     double theta, double alpha, double beta, double delta, const SimConfig& cfg) {
  check_sprt_parameters(theta, alpha, beta, delta);
  const auto start = std::chrono::steady_clock::now();
  std::vector<RunResult> batch;
  std::size_t next_in_batch = 0;
  std::uint64_t issued = 0;
  auto next = [&]() -> std::optional<RunResult> {
    if (next_in_batch == batch.size()) {
      const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - start);
      if (static_cast<std::uint64_t>(ms.count()) > cfg.max_time_ms)
        return std::nullopt;
      batch = cfg.parallel ? simulate_batch(e, p, step_bound, cfg.seed, issued, kBatchSize)
                           : simulate_batch_serial(e, p, step_bound, cfg.seed, issued, kBatchSize);
      issued += kBatchSize;
      next_in_batch = 0;
    }
    return batch[next_in_batch++];
  };
  return sprt(next, theta, alpha, beta, delta, cfg.max_runs);
}

} // namespace lodin
