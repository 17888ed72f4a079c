#include "doctest.h"

#include "lodin/bmc.hpp"
#include "lodin/search.hpp"
#include "lodin/simulation.hpp"
#include "lodin/transforms.hpp"
#include "program_gen.hpp"
#include "test_util.hpp"

#include <cmath>
#include <deque>
#include <map>
#include <set>

using namespace lodin;
using props::parse_prop;

namespace {

ExplicitEngine swap_loop() { return ExplicitEngine(test::load(test::read_corpus("swap.ll"))); }

ExplicitEngine peterson() {
  return ExplicitEngine(test::load(test::read_corpus("peterson.ll"), {"petersons1", "petersons2"}));
}

ir::Module prepared(const std::string& text, std::vector<std::string> entries = {"main"}) {
  return transforms::apply(test::load(text, std::move(entries)), {});
}

/// P(Bin(m, p) <= x) by direct summation of the mass function.
long double oracle_cdf(std::uint64_t x, std::uint64_t m, long double p) {
  if (p <= 0)
    return 1;
  if (p >= 1)
    return x >= m ? 1 : 0;
  long double sum = 0;
  for (std::uint64_t k = 0; k <= x && k <= m; ++k) {
    const long double lg = std::lgamma(static_cast<long double>(m + 1)) -
                           std::lgamma(static_cast<long double>(k + 1)) -
                           std::lgamma(static_cast<long double>(m - k + 1));
    sum += std::exp(lg + k * std::log(p) + (m - k) * std::log1p(-p));
  }
  return sum;
}

std::pair<double, double> oracle_interval(std::uint64_t x, std::uint64_t m, double alpha) {
  auto solve = [](auto pred) {
    long double lo = 0, hi = 1;
    for (int i = 0; i < 200; ++i) {
      const long double mid = (lo + hi) / 2;
      (pred(mid) ? lo : hi) = mid;
    }
    return static_cast<double>(lo);
  };
  const double hi = x == m ? 1.0 : solve([&](long double p) { return oracle_cdf(x, m, p) > alpha / 2; });
  const double lo = x == 0 ? 0.0 : solve([&](long double p) { return 1 - oracle_cdf(x - 1, m, p) <= alpha / 2; });
  return {lo, hi};
}

/// Independent closure of the naive generator with a local state key.
std::size_t closure_size(const ExplicitEngine& e) {
  std::set<std::string> seen;
  std::deque<ExplicitNetState> work{e.initial()};
  auto key = [](const ExplicitNetState& s) {
    std::string k;
    for (const auto& st : s.procs)
      for (const auto& fr : st) {
        k += std::to_string(fr.func) + "/" + std::to_string(fr.prev) + "/" + std::to_string(fr.cur) + "/" +
             std::to_string(fr.pc) + "/";
        for (auto r : fr.regs)
          k += std::to_string(r) + ".";
        k += "f" + std::to_string(fr.frees.size()) + "|";
      }
    ExplicitContext::serialize(s.ctx, k);
    return k + "#" + std::to_string(static_cast<int>(s.error.kind));
  };
  seen.insert(key(work.front()));
  std::vector<ExplicitEngine::Succ> out;
  while (!work.empty()) {
    auto s = std::move(work.front());
    work.pop_front();
    out.clear();
    e.successors(s, Generator::Naive, out);
    for (auto& o : out)
      if (seen.insert(key(o.state)).second)
        work.push_back(std::move(o.state));
  }
  return seen.size();
}

const char* kCoin = R"(
declare void @error()
define void @main() {
init:
  %v = nondet i8
  %c = icmp ult i8 %v, 128
  br i1 %c, label %heads, label %tails
heads:
  call void @error()
  br label %tails
tails:
  ret void
}
)";

/// error() is called with probability k/256.
std::string bernoulli_program(int k) {
  std::string s = kCoin;
  const auto pos = s.find("128");
  return s.replace(pos, 3, std::to_string(k));
}

} // namespace

TEST_CASE("clopper-pearson") {
  SUBCASE("reference value") {
    const auto iv = clopper_pearson(9269, 31883, 0.05);
    CHECK(std::abs(iv.lo - 0.285738) <= 5e-4);
    CHECK(std::abs(iv.hi - 0.295738) <= 5e-4);
    CHECK(iv.confidence == doctest::Approx(0.95));
  }
  SUBCASE("boundaries") {
    CHECK(clopper_pearson(0, 10, 0.05).lo == 0.0);
    CHECK(clopper_pearson(10, 10, 0.05).hi == 1.0);
    // x = 0: hi solves (1-p)^m = alpha/2
    CHECK(clopper_pearson(0, 10, 0.05).hi == doctest::Approx(1 - std::pow(0.025, 0.1)).epsilon(1e-6));
    CHECK_THROWS(clopper_pearson(11, 10, 0.05));
    CHECK_THROWS(clopper_pearson(1, 0, 0.05));
    CHECK_THROWS(clopper_pearson(1, 10, 1.5));
  }
  SUBCASE("agrees with a summation oracle") {
    for (auto [x, m] : {std::pair<int, int>{5, 10}, {1, 7}, {0, 3}, {3, 3}, {17, 40}, {99, 100}}) {
      const auto iv = clopper_pearson(x, m, 0.05);
      const auto [lo, hi] = oracle_interval(x, m, 0.05);
      CAPTURE(x);
      CAPTURE(m);
      CHECK(std::abs(iv.lo - lo) < 1e-6);
      CHECK(std::abs(iv.hi - hi) < 1e-6);
    }
  }
  SUBCASE("nesting and shrinking") {
    for (std::uint64_t m : {10, 50, 200, 1000}) {
      for (std::uint64_t x = 0; x <= m; x += m / 10) {
        const auto wide = clopper_pearson(x, m, 0.01), narrow = clopper_pearson(x, m, 0.05);
        CHECK(wide.lo <= narrow.lo + 1e-9);
        CHECK(wide.hi >= narrow.hi - 1e-9);
        CHECK(narrow.lo <= narrow.hi);
      }
    }
    double last = 1.0;
    for (std::uint64_t m = 10; m <= 10000; m *= 10) {
      const auto w = clopper_pearson(3 * m / 10, m, 0.05).width();
      CHECK(w < last);
      last = w;
    }
  }
}

TEST_CASE("binomial cdf") {
  for (double p : {0.1, 0.5, 0.9})
    for (std::uint64_t x = 0; x <= 12; x += 3)
      CHECK(binomial_cdf(x, 12, p) == doctest::Approx(static_cast<double>(oracle_cdf(x, 12, p))).epsilon(1e-9));
}

TEST_CASE("explicit reachability on the swap loop") {
  const auto e = swap_loop();
  for (auto g : {Generator::Naive, Generator::Bicycle, Generator::Binoculars}) {
    CAPTURE(generator_name(g));
    SearchConfig cfg;
    cfg.generator = g;
    auto r = reachable(e, *parse_prop("@0.main.%b;ui8 == 1;ui8"), cfg);
    CHECK(r.outcome == Outcome::NotSatisfied);
    r = reachable(e, *parse_prop("@0.main.%x;ui32 == @0.main.%z;ui32"), cfg);
    CHECK(r.outcome == Outcome::Satisfied);
    CHECK(r.trace.empty()); // the initial state already satisfies it
    r = reachable(e, *parse_prop("@0.main.%x;ui32 == 1;ui32"), cfg);
    CHECK(r.outcome == Outcome::Satisfied);
    CHECK_FALSE(r.trace.empty());
  }
}

TEST_CASE("naive search visits each reachable state once") {
  for (const auto* name : {"swap.ll", "peterson.ll"}) {
    CAPTURE(name);
    const bool pet = std::string(name) == "peterson.ll";
    const auto e = pet ? peterson() : swap_loop();
    for (auto order : {Order::Dfs, Order::Bfs}) {
      SearchConfig cfg;
      cfg.order = order;
      const auto r = enum_states(e, cfg);
      CHECK(r.complete);
      CHECK(r.states == closure_size(e));
    }
  }
}

TEST_CASE("bfs witnesses are shortest") {
  const auto e = ExplicitEngine(test::load(R"(
define void @main() {
init:
  %p = alloca i32
  br label %loop
loop:
  %i = phi i32 [0, %init], [%n, %loop]
  %n = add i32 %i, 1
  store i32 %n, i32* %p
  %c = icmp ult i32 %n, 5
  br i1 %c, label %loop, label %out
out:
  ret void
}
)"));
  SearchConfig bfs;
  bfs.order = Order::Bfs;
  const auto prop = parse_prop("@0.main.%n;ui32 == 3;ui32");
  const auto r = reachable(e, *prop, bfs);
  REQUIRE(r.outcome == Outcome::Satisfied);
  // stub call, alloca, br, then 3 rounds of phi/add/store/icmp/br minus the last store/icmp/br
  CHECK(r.trace.size() == 3 + 5 * 2 + 2);
  // replaying the trace lands in a satisfying state
  auto s = e.initial();
  for (const auto& f : r.trace) {
    std::vector<ExplicitEngine::Succ> out;
    e.step(s, static_cast<std::size_t>(f.proc), out);
    REQUIRE(out.size() == 1);
    s = out[0].state;
  }
  CHECK(props::Evaluator(e).eval(*prop, s));
  SearchConfig dfs;
  CHECK(reachable(e, *prop, dfs).trace.size() >= r.trace.size());
}

TEST_CASE("peterson reductions") {
  const auto e = peterson();
  std::map<Generator, std::uint64_t> counts;
  for (auto g : {Generator::Naive, Generator::Bicycle, Generator::Binoculars}) {
    SearchConfig cfg;
    cfg.generator = g;
    CAPTURE(generator_name(g));
    CHECK(reachable(e, *parse_prop("DataRace"), cfg).outcome == Outcome::Satisfied);
    const auto r = enum_states(e, cfg);
    CHECK(r.complete);
    CHECK(r.race_states > 0);
    counts[g] = r.states;
  }
  CHECK(counts[Generator::Bicycle] < counts[Generator::Naive]);
  CHECK(counts[Generator::Binoculars] < counts[Generator::Naive]);
}

TEST_CASE("limits make the search inconclusive") {
  const auto e = peterson();
  SearchConfig cfg;
  cfg.limits.max_states = 100;
  const auto r = reachable(e, *parse_prop("@0.petersons1.%ov;ui32 == 77;ui32"), cfg);
  CHECK(r.outcome == Outcome::Inconclusive);
  CHECK(r.reason.find("state limit") != std::string::npos);
  const auto en = enum_states(e, cfg);
  CHECK_FALSE(en.complete);
}

TEST_CASE("state enumeration by simulation") {
  const auto e = peterson();
  SearchConfig cfg;
  cfg.seed = 7;
  const auto full = enum_states(e, {});
  const auto one = enum_states_smc(e, 200, 1, cfg);
  CHECK(one.states <= 201);
  std::uint64_t last = 0;
  for (std::uint64_t runs : {1, 5, 20, 60}) {
    const auto r = enum_states_smc(e, 200, runs, cfg);
    CHECK(r.states >= last);
    CHECK(r.states <= full.states);
    CHECK(r.race_states <= full.race_states);
    last = r.states;
  }
  CHECK(enum_states_smc(e, 200, 20, cfg).states == enum_states_smc(e, 200, 20, cfg).states);
}

TEST_CASE("parallel batches equal the serial reference") {
  const auto e = peterson();
  const auto prop = parse_prop("DataRace");
  for (std::uint64_t first : {0, 64, 1000}) {
    const auto a = simulate_batch_serial(e, *prop, 300, 11, first, 64);
    const auto b = simulate_batch(e, *prop, 300, 11, first, 64);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(a[k].satisfied == b[k].satisfied);
      CHECK(a[k].first_hit == b[k].first_hit);
      CHECK(a[k].log_prob == b[k].log_prob);
    }
  }
}

TEST_CASE("run probabilities") {
  SUBCASE("two processes without choices") {
    const auto e = ExplicitEngine(test::load(R"(
define void @a() {
init:
  ret void
}
define void @b() {
init:
  ret void
}
)", {"a", "b"}));
    Rng rng = run_rng(3, 0);
    const auto r = simulate_run(e, *parse_prop("[5.none]"), 25, rng);
    CHECK_FALSE(r.satisfied);
    CHECK(r.log_prob == doctest::Approx(-25 * std::log(2.0)).epsilon(1e-12));
  }
  SUBCASE("a sampled byte weighs 2^-8") {
    const auto e = ExplicitEngine(test::load(kCoin));
    Rng rng = run_rng(3, 1);
    const auto r = simulate_run(e, *parse_prop("[5.none]"), 3, rng);
    // stub call, nondet, icmp
    CHECK(r.log_prob == doctest::Approx(-8 * std::log(2.0)).epsilon(1e-12));
    CHECK(std::exp(r.log_prob) > 0.0);
    CHECK(std::exp(r.log_prob) <= 1.0);
  }
}

TEST_CASE("probability estimation") {
  const auto e = ExplicitEngine(test::load(kCoin));
  SimConfig cfg;
  cfg.seed = 99;
  SUBCASE("fair coin") {
    const auto r = estimate_probability(e, *parse_prop("[0.error]"), 10, 0.05, 0.05, cfg);
    CHECK(r.complete);
    CHECK(r.interval.width() <= 0.05);
    CHECK(r.interval.lo <= 0.5);
    CHECK(r.interval.hi >= 0.5);
    CHECK(r.stats.total % kBatchSize == 0);
    std::uint64_t mass = 0;
    for (const auto& [step, n] : r.stats.first_hits) {
      CHECK(step == 4); // stub call, nondet, icmp, br
      mass += n;
    }
    CHECK(mass == r.stats.satisfying);
  }
  SUBCASE("certain property") {
    const auto r = estimate_probability(e, *parse_prop("!DataRace"), 10, 0.05, 0.05, cfg);
    CHECK(r.stats.satisfying == r.stats.total);
    CHECK(r.stats.first_hits.at(0) == r.stats.total);
    CHECK(r.interval.hi == 1.0);
  }
  SUBCASE("serial and parallel agree") {
    SimConfig serial = cfg;
    serial.parallel = false;
    const auto a = estimate_probability(e, *parse_prop("[0.error]"), 10, 0.05, 0.1, cfg);
    const auto b = estimate_probability(e, *parse_prop("[0.error]"), 10, 0.05, 0.1, serial);
    CHECK(a.stats.total == b.stats.total);
    CHECK(a.stats.satisfying == b.stats.satisfying);
  }
  SUBCASE("run limit") {
    SimConfig capped = cfg;
    capped.max_runs = 100;
    const auto r = estimate_probability(e, *parse_prop("[0.error]"), 10, 0.05, 0.01, capped);
    CHECK_FALSE(r.complete);
    CHECK(r.stats.total == 100);
  }
}

TEST_CASE("sequential probability ratio test") {
  SUBCASE("all-satisfying stream accepts") {
    const auto r = sprt([] { return std::optional<RunResult>(RunResult{true, 0, 0}); }, 0.5, 0.05, 0.05, 0.01, 100000);
    CHECK(r.decision == SprtDecision::Accept);
    // r drops by log((θ-δ)/(θ+δ)) per run until it crosses log(β/(1-α))
    const double per = std::log(0.49 / 0.51), bound = std::log(0.05 / 0.95);
    CHECK(r.stats.total == static_cast<std::uint64_t>(std::ceil(bound / per)));
  }
  SUBCASE("never-satisfying stream rejects") {
    const auto r = sprt([] { return std::optional<RunResult>(RunResult{}); }, 0.5, 0.05, 0.05, 0.01, 100000);
    CHECK(r.decision == SprtDecision::Reject);
  }
  SUBCASE("run cap") {
    bool flip = false;
    const auto r = sprt([&] { flip = !flip; return std::optional<RunResult>(RunResult{flip, 0, 0}); },
                        0.5, 0.05, 0.05, 0.01, 500);
    CHECK(r.decision == SprtDecision::Inconclusive);
    CHECK(r.stats.total == 500);
  }
  SUBCASE("bad parameters") {
    CHECK_THROWS(check_sprt_parameters(0.005, 0.05, 0.05, 0.01));
    CHECK_THROWS(check_sprt_parameters(0.995, 0.05, 0.05, 0.01));
    CHECK_THROWS(check_sprt_parameters(0.5, 0.0, 0.05, 0.01));
  }
  SUBCASE("on programs") {
    SimConfig cfg;
    cfg.seed = 5;
    const auto hi = ExplicitEngine(test::load(bernoulli_program(179)));
    const auto lo = ExplicitEngine(test::load(bernoulli_program(77)));
    const auto p = parse_prop("[0.error]");
    CHECK(sprt_test(hi, *p, 10, 0.5, 0.05, 0.05, 0.01, cfg).decision == SprtDecision::Accept);
    CHECK(sprt_test(lo, *p, 10, 0.5, 0.05, 0.05, 0.01, cfg).decision == SprtDecision::Reject);
  }
}

TEST_CASE("bounded model checking finds the nondet witness") {
  const auto m = prepared(test::read_corpus("symbneed.ll"));
  const auto r = bmc_reach(m, 0, "error", {});
  REQUIRE(r.outcome == Outcome::Satisfied);
  REQUIRE(r.value("%2"));
  CHECK(r.value("%2")->bits == 5);
  CHECK(r.frame_function == "main");

  std::string text = test::read_corpus("symbneed.ll");
  const auto pos = text.find("icmp eq i32 %3, 5");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 17, "icmp ugt i32 %3, 4294967295");
  CHECK(bmc_reach(prepared(text), 0, "error", {}).outcome == Outcome::NotSatisfied);

  BmcConfig eager;
  eager.eager_prune = true;
  CHECK(bmc_reach(m, 0, "error", eager).outcome == Outcome::Satisfied);
  CHECK(bmc_reach(prepared(text), 0, "error", eager).outcome == Outcome::NotSatisfied);
}

TEST_CASE("bmc restrictions") {
  const auto pet = prepared(test::read_corpus("peterson.ll"), {"petersons1", "petersons2"});
  CHECK_THROWS_WITH(bmc_reach(pet, 0, "error", {}), "symbolic engine is single-threaded only");
  CHECK_THROWS_AS(bmc_reach(prepared(test::read_corpus("swap.ll")), 0, "error", {}), EngineError);
  CHECK_THROWS_AS(callsite_targets(*parse_prop("DataRace")), UnsupportedInSymbolic);
  CHECK(callsite_targets(*parse_prop("[0.a] || [0.b]")).size() == 2);
}

TEST_CASE("merging keeps the explored state count linear") {
  std::vector<std::uint64_t> merged, plain;
  for (int k = 1; k <= 6; ++k) {
    const auto m = prepared(test::diamond_program(k, 2 * k + 1));
    BmcConfig on, off;
    off.merge = false;
    const auto a = bmc_reach(m, 0, "error", on);
    const auto b = bmc_reach(m, 0, "error", off);
    CHECK(a.outcome == Outcome::NotSatisfied);
    CHECK(b.outcome == Outcome::NotSatisfied);
    CHECK(b.states >= (std::uint64_t{1} << k));
    merged.push_back(a.states);
    plain.push_back(b.states);
    // the largest reachable sum is hit in both modes
    CHECK(bmc_reach(prepared(test::diamond_program(k, 2 * k)), 0, "error", on).outcome == Outcome::Satisfied);
  }
  for (std::size_t k = 1; k < merged.size(); ++k)
    CHECK(merged[k] - merged[k - 1] == merged[1] - merged[0]);
}

TEST_CASE("bmc with unrolled loops") {
  const char* src = R"(
declare void @error()
define void @main() {
init:
  br label %loop
loop:
  %i = phi i32 [0, %init], [%n, %body]
  %v = nondet i8
  %c = icmp eq i8 %v, 7
  br i1 %c, label %body, label %out
body:
  %n = add i32 %i, 1
  %d = icmp eq i32 %n, 3
  br i1 %d, label %hit, label %loop
hit:
  call void @error()
  br label %out
out:
  ret void
}
)";
  const auto m = prepared(src);
  BmcConfig cfg;
  cfg.unroll_bound = 2;
  CHECK(bmc_reach(m, 0, "error", cfg).outcome == Outcome::NotSatisfiedWithinBound);
  cfg.unroll_bound = 4;
  CHECK(bmc_reach(m, 0, "error", cfg).outcome == Outcome::Satisfied);
}

TEST_CASE("bmc agrees with explicit search on random programs") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const auto text = test::random_program(seed);
    CAPTURE(text);
    const auto m = prepared(text);
    const ExplicitEngine e(m);
    const auto ex = reachable(e, *parse_prop("[0.error]"), {});
    REQUIRE(ex.outcome != Outcome::Inconclusive);
    const auto sy = bmc_reach(m, 0, "error", {});
    CHECK(sy.outcome == ex.outcome);
    BmcConfig off;
    off.merge = false;
    CHECK(bmc_reach(m, 0, "error", off).outcome == ex.outcome);
  }
}
