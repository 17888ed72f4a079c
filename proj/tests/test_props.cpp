#include "doctest.h"

#include "lodin/engine.hpp"
#include "lodin/props.hpp"
#include "test_util.hpp"

#include <random>

using namespace lodin;
using namespace lodin::props;
using Eng = Engine<ExplicitContext>;

TEST_CASE("query parsing") {
  auto q = parse_query("E<> (@0.main.%b;ui8 == 1;ui8)");
  CHECK(q.kind == Query::Kind::EReach);
  REQUIRE(q.prop->kind == Prop::Kind::Compare);
  CHECK(q.prop->lhs.is_register);
  CHECK(q.prop->lhs.proc == 0);
  CHECK(q.prop->lhs.func == "main");
  CHECK(q.prop->lhs.reg == "%b");
  CHECK(q.prop->lhs.type == QueryType{false, 8});
  CHECK(q.prop->rhs.number == 1);

  q = parse_query("Pr[<=5000] (<> DataRace)");
  CHECK(q.kind == Query::Kind::PrEstimate);
  CHECK(q.step_bound == 5000);
  CHECK(q.prop->kind == Prop::Kind::DataRace);
  CHECK(q.alpha == 0.05);
  CHECK(q.epsilon == 0.01);

  q = parse_query("EnumStatesSMC <=5000 100");
  CHECK(q.kind == Query::Kind::EnumStatesSMC);
  CHECK(q.step_bound == 5000);
  CHECK(q.runs == 100);

  CHECK(parse_query("EnumStates").kind == Query::Kind::EnumStates);

  q = parse_query("Pr[<=10] (<> [0.error]) >= 0.5 {Alpha=0.01, Beta=0.02, Delta=0.05}");
  CHECK(q.kind == Query::Kind::PrTest);
  CHECK(q.theta == 0.5);
  CHECK(q.alpha == 0.01);
  CHECK(q.beta == 0.02);
  CHECK(q.delta == 0.05);
  CHECK(q.prop->kind == Prop::Kind::CallSite);
  CHECK(callsite_only(*q.prop));

  q = parse_query("Pr[<=10] (<> DivZero || !Overflows) {Epsilon=0.05}");
  CHECK(q.epsilon == 0.05);
  CHECK(q.prop->kind == Prop::Kind::Or);
  CHECK_FALSE(callsite_only(*q.prop));

  q = parse_query("E<> (-1;si8 < @0.main.%x;si8) && [1.foo]");
  CHECK(q.prop->kind == Prop::Kind::And);
  CHECK(q.prop->a->lhs.number == 0xFF);
}

TEST_CASE("query parse errors") {
  CHECK_THROWS_AS(parse_query("E<> (@0.main.%b;ui8 == 1;ui32)"), QueryParseError);
  CHECK_THROWS_AS(parse_query("E<> (@0.main;ui8 == 1;ui8)"), QueryParseError);
  CHECK_THROWS_AS(parse_query("Pr[<=10] (<> DataRace) {Gamma=0.1}"), QueryParseError);
  CHECK_THROWS_AS(parse_query("Pr[<=0] (<> DataRace)"), QueryParseError);
  CHECK_THROWS_AS(parse_query("E<> (1;ui12 == 1;ui12)"), QueryParseError);
  CHECK_THROWS_AS(parse_query("E<> DataRace garbage"), QueryParseError);
  CHECK_THROWS_AS(parse_query("Pr[<=10] (<> DataRace) >= 0.995"), QueryParseError);
  CHECK_THROWS_AS(parse_query(""), QueryParseError);
}

TEST_CASE("printing round trips") {
  for (const char* text : {"E<> (@0.main.%b;ui8 == 1;ui8)", "E<> (DataRace && !(DivZero || [1.f]))",
                           "E<> ((2;si16 <= @1.g.%r3;si16) || Overflows)"}) {
    const auto p = parse_query(text).prop;
    CHECK(parse_prop(p->str())->str() == p->str());
  }
}

TEST_CASE("compare reads the head frame with zero defaults") {
  const Eng e(test::load(test::read_corpus("swap.ll")));
  const Evaluator ev(e);
  const auto s0 = e.initial();
  CHECK(ev.eval(*parse_prop("(@0.main.%x;ui32 == @0.main.%z;ui32)"), s0));
  CHECK(ev.eval(*parse_prop("(@0.main.%missing;ui32 == 0;ui32)"), s0));
  CHECK(ev.eval(*parse_prop("(@5.main.%x;ui32 == 0;ui32)"), s0));
  CHECK(ev.eval(*parse_prop("[0.main]"), s0));
  CHECK_FALSE(ev.eval(*parse_prop("[0.other]"), s0));
  CHECK_FALSE(ev.eval(*parse_prop("DataRace"), s0));
}

TEST_CASE("signed and unsigned comparisons") {
  const char* src = "define void @main() {\ninit:\n  %a = add i8 0, 200\n  ret void\n}\n";
  const Eng e(test::load(src));
  const Evaluator ev(e);
  auto s = e.initial();
  std::vector<Eng::Succ> out;
  for (int i = 0; i < 2; ++i) {
    out.clear();
    e.step(s, 0, out);
    s = out[0].state;
  }
  CHECK(ev.eval(*parse_prop("(@0.main.%a;ui8 > 100;ui8)"), s));
  CHECK_FALSE(ev.eval(*parse_prop("(@0.main.%a;si8 > 100;si8)"), s));
  CHECK(ev.eval(*parse_prop("(@0.main.%a;si8 == -56;si8)"), s));
  CHECK(ev.eval(*parse_prop("(@0.main.%a;si32 == -56;si32)"), s));
  CHECK(ev.eval(*parse_prop("(@0.main.%a;ui32 == 200;ui32)"), s));
}

TEST_CASE("data race detection") {
  const char* src = R"(
@g = global i32 0
@h = global i32 0
define void @p() {
init:
  store i32 1, i32* @g
  ret void
}
define void @q() {
init:
  store i32 2, i32* @g
  ret void
}
define void @r() {
init:
  %v = load i32, i32* @g
  ret void
}
define void @s() {
init:
  store i32 3, i32* @h
  ret void
}
)";
  const auto m = test::load(src, {"p", "q"});
  auto after_call = [](const Eng& e) {
    auto s = e.initial();
    std::vector<Eng::Succ> out;
    for (std::size_t p = 0; p < e.num_procs(); ++p) {
      out.clear();
      e.step(s, p, out);
      s = out[0].state;
    }
    return s;
  };
  {
    const Eng e(m);
    CHECK(Evaluator(e).data_race(after_call(e)));
  }
  {
    const Eng e(test::load(src, {"r", "p"}));
    CHECK(Evaluator(e).data_race(after_call(e)));
  }
  {
    const Eng e(test::load(src, {"r", "r"}));
    CHECK_FALSE(Evaluator(e).data_race(after_call(e)));
  }
  {
    const Eng e(test::load(src, {"p", "s"}));
    CHECK_FALSE(Evaluator(e).data_race(after_call(e)));
  }
  {
    const Eng e(test::load(src, {"p"}));
    CHECK_FALSE(Evaluator(e).data_race(after_call(e)));
  }
}

TEST_CASE("div zero atom") {
  const Eng e(test::load("define void @main() {\ninit:\n  %a = sdiv i32 1, 0\n  ret void\n}\n"));
  auto s = e.initial();
  std::vector<Eng::Succ> out;
  e.step(s, 0, out);
  CHECK(Evaluator(e).div_zero(out[0].state));
  CHECK_FALSE(Evaluator(e).div_zero(s));
}

TEST_CASE("overlap arithmetic") {
  for (std::uint64_t o1 = 0; o1 < 8; ++o1)
    for (std::uint64_t n1 = 1; n1 < 5; ++n1)
      for (std::uint64_t o2 = 0; o2 < 8; ++o2)
        for (std::uint64_t n2 = 1; n2 < 5; ++n2) {
          bool shared = false;
          for (std::uint64_t b = 0; b < 16; ++b)
            shared |= (b >= o1 && b < o1 + n1) && (b >= o2 && b < o2 + n2);
          CHECK(ranges_overlap(o1, n1, o2, n2) == shared);
          CHECK(ranges_overlap(o1, n1, o2, n2) == ranges_overlap(o2, n2, o1, n1));
        }
}

TEST_CASE("de morgan on reachable states") {
  const Eng e(test::load(test::read_corpus("peterson.ll"), {"petersons1", "petersons2"}));
  const Evaluator ev(e);
  const auto lhs = parse_prop("!(DataRace && (@0.petersons1.%ov;ui32 == 1;ui32))");
  const auto rhs = parse_prop("!DataRace || !(@0.petersons1.%ov;ui32 == 1;ui32)");
  Rng rng(5);
  for (int run = 0; run < 50; ++run) {
    auto s = e.initial();
    for (int i = 0; i < 40; ++i) {
      CHECK(ev.eval(*lhs, s) == ev.eval(*rhs, s));
      e.sample_step(s, rng);
    }
  }
}
