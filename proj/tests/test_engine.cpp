#include "doctest.h"

#include "lodin/engine.hpp"
#include "lodin/explicit_context.hpp"
#include "lodin/props.hpp"
#include "test_util.hpp"

#include <deque>
#include <map>
#include <set>

using namespace lodin;
using Eng = Engine<ExplicitContext>;
using State = Eng::State;

namespace {

std::string key(const State& s) {
  std::string out;
  for (const auto& st : s.procs) {
    out += "|";
    for (const auto& fr : st) {
      out += std::to_string(fr.func) + "," + std::to_string(fr.prev) + "," +
             std::to_string(fr.cur) + "," + std::to_string(fr.pc) + ";";
      for (auto r : fr.regs)
        out += std::to_string(r) + ".";
    }
  }
  ExplicitContext::serialize(s.ctx, out);
  out += std::to_string(static_cast<int>(s.error.kind));
  return out;
}

State step1(const Eng& e, const State& s, std::size_t p = 0) {
  std::vector<Eng::Succ> out;
  e.step(s, p, out);
  REQUIRE(out.size() == 1);
  return out[0].state;
}

std::uint64_t reg(const Eng& e, const State& s, const std::string& func, const std::string& r,
                  unsigned bits = 32, std::size_t proc = 0) {
  props::Comparand c;
  c.is_register = true;
  c.proc = static_cast<int>(proc);
  c.func = func;
  c.reg = r;
  c.type = {false, bits};
  return props::Evaluator(e).read(c, s);
}

/// Breadth-first closure of the naive generator.
std::vector<State> reachable(const Eng& e, Generator g, std::size_t cap = 200000) {
  std::vector<State> all;
  std::set<std::string> seen;
  std::deque<State> work{e.initial()};
  seen.insert(key(work.front()));
  std::vector<Eng::Succ> out;
  while (!work.empty() && all.size() < cap) {
    State s = std::move(work.front());
    work.pop_front();
    out.clear();
    e.successors(s, g, out);
    for (auto& o : out)
      if (seen.insert(key(o.state)).second)
        work.push_back(o.state);
    all.push_back(std::move(s));
  }
  return all;
}

} // namespace

TEST_CASE("swap loop transitions") {
  const Eng e(test::load(test::read_corpus("swap.ll")));
  State s = e.initial();
  REQUIRE(e.num_procs() == 1);
  REQUIRE(e.next_instr(s, 0)->op == ir::Opcode::Call);
  s = step1(e, s); // enter main
  CHECK(s.procs[0].size() == 2);
  s = step1(e, s); // br label %blk
  const auto& f = e.module().functions[static_cast<std::size_t>(s.procs[0].back().func)];
  CHECK(f.blocks[static_cast<std::size_t>(s.procs[0].back().cur)].label == "blk");
  CHECK(f.blocks[static_cast<std::size_t>(s.procs[0].back().prev)].label == "init");
  CHECK(s.procs[0].back().pc == 0);
  CHECK(reg(e, s, "main", "%x") == reg(e, s, "main", "%z")); // both read 0 before the phis
  for (int iter = 0; iter < 6; ++iter) {
    s = step1(e, s); // whole phi prefix
    CHECK(s.procs[0].back().pc == 2);
    CHECK(reg(e, s, "main", "%x") == static_cast<std::uint64_t>(iter % 2));
    CHECK(reg(e, s, "main", "%z") == static_cast<std::uint64_t>(1 - iter % 2));
    s = step1(e, s); // icmp
    CHECK(reg(e, s, "main", "%b", 8) == 0);
    s = step1(e, s); // br back to blk
  }
}

TEST_CASE("return from entry point spins in the stub") {
  const Eng e(test::load("define void @main() {\ninit:\n  ret void\n}\n"));
  State s = step1(e, step1(e, e.initial()));
  CHECK(s.procs[0].size() == 1);
  CHECK(s.procs[0].back().pc == 1);
  s = step1(e, s); // br loop
  CHECK(e.finished(s, 0));
  s = step1(e, s); // loop to itself
  const State t = step1(e, s);
  CHECK(key(t) == key(s));
  CHECK(s.ctx.regs.empty());
}

TEST_CASE("calls bind parameters, return values and release registers") {
  const char* src = R"(
define i32 @inc(i32 %a) {
init:
  %b = add i32 %a, 1
  ret i32 %b
}
define void @main() {
init:
  %p = alloca i32
  %v = call i32 @inc(i32 41)
  store i32 %v, i32* %p
  %w = load i32, i32* %p
  ret void
}
)";
  const Eng e(test::load(src));
  State s = e.initial();
  for (int i = 0; i < 7; ++i)
    s = step1(e, s);
  CHECK(reg(e, s, "main", "%w") == 42);
  CHECK(s.procs[0].size() == 2);
  s = step1(e, s); // ret void frees the alloca
  CHECK(s.ctx.mem.block_count() == 0);
  CHECK(s.ctx.regs.empty());
}

TEST_CASE("errors are absorbing states") {
  SUBCASE("division by zero") {
    const Eng e(test::load("define void @main() {\ninit:\n  %a = udiv i32 1, 0\n  ret void\n}\n"));
    const State s = step1(e, step1(e, e.initial()));
    CHECK(s.error.kind == ErrorKind::DivByZero);
    std::vector<Eng::Succ> out;
    e.successors(s, Generator::Naive, out);
    CHECK(out.empty());
  }
  SUBCASE("wide shift") {
    const Eng e(test::load("define void @main() {\ninit:\n  %a = shl i32 1, 40\n  ret void\n}\n"));
    CHECK(step1(e, step1(e, e.initial())).error.kind == ErrorKind::UndefinedResult);
  }
  SUBCASE("narrow division by zero enumerates") {
    const Eng e(test::load("define void @main() {\ninit:\n  %a = udiv i8 1, 0\n  ret void\n}\n"));
    std::vector<Eng::Succ> out;
    e.step(step1(e, e.initial()), 0, out);
    CHECK(out.size() == 256);
  }
  SUBCASE("out of bounds load") {
    const char* src = R"(
define void @main() {
init:
  %p = alloca i8
  %q = getelementptr i8, i8* %p, i32 4
  %v = load i8, i8* %q
  ret void
}
)";
    const Eng e(test::load(src));
    State s = e.initial();
    for (int i = 0; i < 3; ++i)
      s = step1(e, s);
    CHECK(props::Evaluator(e).overflows(s));
    s = step1(e, s);
    CHECK(s.error.kind == ErrorKind::MemoryError);
  }
  SUBCASE("unknown external") {
    const Eng e(test::load("declare void @ext()\ndefine void @main() {\ninit:\n  call void @ext()\n  ret void\n}\n"));
    std::vector<Eng::Succ> out;
    CHECK_THROWS_AS(e.step(step1(e, e.initial()), 0, out), EngineError);
  }
}

TEST_CASE("nondet enumerates small domains") {
  const Eng e(test::load("define void @main() {\ninit:\n  %a = nondet i8\n  ret void\n}\n"));
  std::vector<Eng::Succ> out;
  e.step(step1(e, e.initial()), 0, out);
  REQUIRE(out.size() == 256);
  std::set<std::uint64_t> vals;
  for (const auto& o : out) {
    vals.insert(reg(e, o.state, "main", "%a", 8));
    CHECK(o.log_weight == doctest::Approx(-8 * std::log(2.0)));
  }
  CHECK(vals.size() == 256);

  const Eng wide(test::load("define void @main() {\ninit:\n  %a = nondet i32\n  ret void\n}\n"));
  out.clear();
  CHECK_THROWS_AS(wide.step(step1(wide, wide.initial()), 0, out), EngineError);
}

TEST_CASE("globals and struct gep") {
  const Eng e(test::load(test::read_corpus("peterson.ll"), {"petersons1", "petersons2"}));
  REQUIRE(e.num_procs() == 2);
  State s = e.initial();
  for (int i = 0; i < 4; ++i) // call, alloca, two geps
    s = step1(e, s, 1);
  CHECK(ExplicitPtr::from(BitVec(64, reg(e, s, "petersons2", "%mine", 64, 1))).offset == 4);
  CHECK(ExplicitPtr::from(BitVec(64, reg(e, s, "petersons2", "%theirs", 64, 1))).offset == 0);
  CHECK(ExplicitPtr::from(BitVec(64, reg(e, s, "petersons2", "%opt", 64, 1))).block == 2);
  for (int i = 0; i < 9; ++i) // fill the options struct, then *mflag = 1
    s = step1(e, s, 1);
  CHECK(s.ctx.mem.read(2, 0, 8).bits == reg(e, s, "petersons2", "%mine", 64, 1));
  CHECK(s.ctx.mem.read(0, 4, 4).bits == 1);
  CHECK(s.ctx.mem.read(0, 0, 4).bits == 0);
}

TEST_CASE("sampling weights") {
  const Eng e(test::load(test::read_corpus("peterson.ll"), {"petersons1", "petersons2"}));
  Rng rng(1);
  State s = e.initial();
  for (int i = 0; i < 50; ++i)
    CHECK(e.sample_step(s, rng) == doctest::Approx(-std::log(2.0)));

  const Eng one(test::load(test::read_corpus("swap.ll")));
  State t = one.initial();
  for (int i = 0; i < 20; ++i)
    CHECK(one.sample_step(t, rng) == 0.0);
}

TEST_CASE("i8 nondet sampling is uniform") {
  const Eng e(test::load("define void @main() {\ninit:\n  %a = nondet i8\n  ret void\n}\n"));
  const State s0 = step1(e, e.initial());
  Rng rng(12345);
  std::vector<double> counts(256, 0.0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    State s = s0;
    CHECK(e.sample_step(s, rng) == doctest::Approx(-8 * std::log(2.0)));
    counts[reg(e, s, "main", "%a", 8)] += 1;
  }
  const double expect = n / 256.0;
  double chi2 = 0;
  for (double c : counts)
    chi2 += (c - expect) * (c - expect) / expect;
  // 255 degrees of freedom; mean 255, sd ~22.6
  CHECK(chi2 < 255 + 3 * 22.6);
  for (double c : counts)
    CHECK(std::abs(c - expect) < 3 * std::sqrt(expect));
}

TEST_CASE("reductions replay as naive steps and preserve visible reachability") {
  const Eng e(test::load(test::read_corpus("peterson.ll"), {"petersons1", "petersons2"}));
  const auto naive = reachable(e, Generator::Naive);
  std::set<std::string> naive_keys;
  for (const auto& s : naive)
    naive_keys.insert(key(s));
  const props::Evaluator ev(e);
  std::size_t naive_races = 0;
  for (const auto& s : naive)
    naive_races += ev.data_race(s);
  CHECK(naive_races > 0);

  for (auto g : {Generator::Bicycle, Generator::Binoculars}) {
    CAPTURE(generator_name(g));
    const auto red = reachable(e, g);
    std::size_t races = 0;
    for (const auto& s : red) {
      CHECK(naive_keys.count(key(s)) == 1);
      races += ev.data_race(s);
    }
    CHECK(races > 0);
    CHECK(red.size() < naive.size());

    // replay compound steps
    std::vector<Eng::Succ> out;
    for (std::size_t i = 0; i < red.size(); i += 7) {
      out.clear();
      e.successors(red[i], g, out);
      for (const auto& o : out) {
        State t = red[i];
        for (const auto& f : o.fired)
          t = step1(e, t, static_cast<std::size_t>(f.proc));
        CHECK(key(t) == key(o.state));
      }
    }
  }
}
