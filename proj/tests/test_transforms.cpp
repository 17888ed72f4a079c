#include "doctest.h"

#include "lodin/cfg.hpp"
#include "lodin/engine.hpp"
#include "lodin/explicit_context.hpp"
#include "lodin/printer.hpp"
#include "lodin/transforms.hpp"
#include "test_util.hpp"

using namespace lodin;
using namespace lodin::transforms;

namespace {

ir::Module parse_checked(const std::string& text) {
  auto m = ir::parse_module(text);
  const auto errs = ir::type_check(m);
  if (!errs.empty())
    throw std::runtime_error(errs.front().str());
  return m;
}

void require_typed(const ir::Module& m) {
  const auto errs = ir::type_check(m);
  if (!errs.empty())
    FAIL(errs.front().str() << "\n" << ir::print_module(m));
}

/// Visible events of the single process: loads with their value, stores with
/// the stored value, calls with the callee.
std::vector<std::string> visible_trace(ir::Module m, std::size_t steps) {
  m.set_entry_points({"main"});
  const Engine<ExplicitContext> e(m);
  auto s = e.initial();
  std::vector<std::string> out;
  std::vector<Engine<ExplicitContext>::Succ> next;
  for (std::size_t i = 0; i < steps && !s.is_error(); ++i) {
    const ir::Instr* in = e.next_instr(s, 0);
    std::string ev;
    if (in && in->op == ir::Opcode::Store)
      ev = "store " + e.eval_operand(s, 0, in->ops[0]).str();
    if (in && in->op == ir::Opcode::Call)
      ev = "call " + in->callee;
    next.clear();
    e.step(s, 0, next);
    REQUIRE(next.size() == 1);
    if (in && in->op == ir::Opcode::Load) {
      const auto& fr = s.procs[0].back();
      ev = "load " + e.context().load(s.ctx, e.eval_operand(s, 0, in->ops[0]), in->type).str();
      (void)fr;
    }
    if (!ev.empty())
      out.push_back(ev);
    s = std::move(next[0].state);
  }
  return out;
}

std::size_t count_blocks(const ir::Func& f, const std::string& prefix) {
  std::size_t n = 0;
  for (const auto& b : f.blocks)
    n += b.label.rfind(prefix, 0) == 0;
  return n;
}

bool loop_free_but_trap(const ir::Func& f) {
  const auto cfg = ir::analyze_cfg(f);
  for (const auto& l : cfg.loops)
    if (f.blocks[static_cast<std::size_t>(l.header)].label != kTrapBlock)
      return false;
  return true;
}

const char* kCounter = R"(
@out = global i32 0
define void @main() {
init:
  br label %loop

loop:
  %i = phi i32 [ 0, %init ], [ %next, %loop ]
  %acc = phi i32 [ 5, %init ], [ %acc2, %loop ]
  %acc2 = mul i32 %acc, 3
  store i32 %acc2, i32* @out
  %next = add i32 %i, 1
  %more = icmp slt i32 %next, 2
  br i1 %more, label %loop, label %done

done:
  %fin = add i32 %acc2, %i
  store i32 %fin, i32* @out
  ret void
}
)";

} // namespace

TEST_CASE("name registers") {
  auto m = parse_checked("define void @main() {\n  %1 = add i32 1, 2\n  %2 = add i32 %1, 1\n  ret void\n}\n");
  auto n = name_registers(m);
  const auto& f = n.functions[0];
  CHECK(f.find_reg("%r1"));
  CHECK(f.find_reg("%r2"));
  CHECK_FALSE(f.find_reg("%1"));
  require_typed(n);
  CHECK(ir::print_module(name_registers(n)) == ir::print_module(n));

  const auto named = parse_checked(test::read_corpus("swap.ll"));
  CHECK(ir::print_module(name_registers(named)) == ir::print_module(named));

  auto clash = parse_checked("define void @main() {\n  %r0 = add i32 1, 2\n  %0 = add i32 %r0, 1\n  ret void\n}\n");
  const auto c = name_registers(clash);
  CHECK(c.functions[0].find_reg("%r0"));
  CHECK(c.functions[0].find_reg("%r0.1"));

  auto two = parse_checked(
      "define void @f() {\ninit:\n  %x = add i32 1, 2\n  ret void\n}\n"
      "define void @main() {\ninit:\n  %x = add i32 1, 2\n  ret void\n}\n");
  two = name_registers(two);
  CHECK(two.functions[0].qualified(*two.functions[0].find_reg("%x")) !=
        two.functions[1].qualified(*two.functions[1].find_reg("%x")));
}

TEST_CASE("lift constant expressions") {
  const char* src = R"(
@g = global i32 0
define void @main() {
init:
  store i32 add (i32 2, i32 3), i32* @g
  store i32 mul (i32 add (i32 1, i32 1), i32 7), i32* @g
  ret void
}
)";
  const auto m = lift_constant_exprs(parse_checked(src));
  require_typed(m);
  const auto& b = m.functions[0].blocks[0];
  REQUIRE(b.instrs.size() == 6);
  CHECK(b.instrs[0].op == ir::Opcode::Add);
  CHECK(b.instrs[1].op == ir::Opcode::Store);
  CHECK(b.instrs[2].op == ir::Opcode::Add); // inner first
  CHECK(b.instrs[3].op == ir::Opcode::Mul);
  CHECK(b.instrs[3].ops[0] == b.instrs[2].result);

  const char* folded = R"(
@g = global i32 0
define void @main() {
init:
  store i32 5, i32* @g
  store i32 14, i32* @g
  ret void
}
)";
  CHECK(visible_trace(m, 50) == visible_trace(parse_checked(folded), 50));

  const auto plain = parse_checked(test::read_corpus("swap.ll"));
  CHECK(ir::print_module(lift_constant_exprs(plain)) == ir::print_module(plain));
}

TEST_CASE("lift constant expressions feeding phis and geps") {
  const char* src = R"(
%struct.P = type { i32, i32 }
@p = global %struct.P zeroinitializer
define void @main() {
init:
  br label %next

next:
  %q = phi i32* [ getelementptr (%struct.P, %struct.P* @p, i32 0, i32 1), %init ]
  store i32 9, i32* %q
  %v = load i32, i32* getelementptr (%struct.P, %struct.P* @p, i32 0, i32 1)
  ret void
}
)";
  const auto m = lift_constant_exprs(parse_checked(src));
  require_typed(m);
  CHECK(m.functions[0].blocks[0].instrs.size() == 2); // gep lifted before the br
  const auto t = visible_trace(m, 50);
  REQUIRE(t.size() == 3);
  CHECK(t[1] == "store i32 9");
  CHECK(t[2] == "load i32 9");
}

TEST_CASE("remove unused") {
  auto m = remove_unused(parse_checked(test::read_corpus("swap.ll")));
  require_typed(m);
  const auto& f = m.functions[0];
  const auto succ = *f.find_block("succ");
  CHECK(f.blocks[static_cast<std::size_t>(succ)].instrs.size() == 1);
  CHECK_FALSE(f.find_reg("%y"));

  const char* chain = R"(
@g = global i32 0
define void @main() {
init:
  %a = add i32 1, 2
  %b = mul i32 %a, 2
  %c = sub i32 %b, 1
  store i32 3, i32* @g
  %d = load i32, i32* @g
  call void @main()
  ret void
}
)";
  m = remove_unused(parse_checked(chain));
  require_typed(m);
  const auto& is = m.functions[0].blocks[0].instrs;
  REQUIRE(is.size() == 4);
  CHECK(is[0].op == ir::Opcode::Store);
  CHECK(is[1].op == ir::Opcode::Load);
  CHECK(is[2].op == ir::Opcode::Call);
}

TEST_CASE("naming, lifting and removal preserve visible traces") {
  for (const char* src : {kCounter}) {
    const auto m = parse_checked(src);
    TransformConfig cfg;
    const auto t = apply(m, cfg);
    require_typed(t);
    CHECK(visible_trace(m, 200) == visible_trace(t, 200));
  }
  const auto l1 = parse_checked(test::read_corpus("swap.ll"));
  CHECK(visible_trace(l1, 100) == visible_trace(apply(l1, {}), 100));
}

TEST_CASE("unroll the swap loop") {
  auto r = unroll_loops(parse_checked(test::read_corpus("swap.ll")), 3);
  require_typed(r.module);
  REQUIRE(r.loops.size() == 1);
  CHECK(r.loops[0].header == "blk");
  CHECK(r.loops[0].copies == 3);
  CHECK_FALSE(r.loops[0].complete);
  CHECK_FALSE(r.complete());
  const auto& f = r.module.functions[0];
  CHECK(count_blocks(f, "blk") == 3);
  CHECK(f.find_block(kTrapBlock));
  CHECK(r.module.find_function(kTrapFunction));
  CHECK(loop_free_but_trap(f));

  // the unrolled program reaches the trap after three rounds of the loop body
  auto m = r.module;
  m.set_entry_points({"main"});
  const Engine<ExplicitContext> e(m);
  auto s = e.initial();
  std::vector<Engine<ExplicitContext>::Succ> out;
  int phis = 0;
  for (int i = 0; i < 30; ++i) {
    const auto* in = e.next_instr(s, 0);
    if (in && in->op == ir::Opcode::Phi)
      ++phis;
    out.clear();
    e.step(s, 0, out);
    s = out[0].state;
  }
  CHECK(phis == 3);
  const auto& fr = s.procs[0].back();
  CHECK(e.module().functions[static_cast<std::size_t>(fr.func)].blocks[static_cast<std::size_t>(fr.cur)].label ==
        kTrapBlock);
}

TEST_CASE("unroll a counted loop exactly") {
  const auto m = parse_checked(kCounter);
  auto r = unroll_loops(m, 10);
  require_typed(r.module);
  REQUIRE(r.loops.size() == 1);
  CHECK(r.loops[0].trip_count == 2u);
  CHECK(r.loops[0].copies == 2);
  CHECK(r.loops[0].complete);
  CHECK(count_blocks(r.module.functions[0], "loop") == 2);
  CHECK(visible_trace(m, 200) == visible_trace(r.module, 200));

  // a smaller bound cuts the loop off
  auto cut = unroll_loops(m, 1);
  require_typed(cut.module);
  CHECK_FALSE(cut.complete());
  const auto t = visible_trace(cut.module, 200);
  const auto full = visible_trace(m, 200);
  REQUIRE(t.size() >= 1);
  CHECK(t[0] == full[0]);
  CHECK(t.back() == "call __lodin_unroll_bound");
}

TEST_CASE("unroll while-style and nested loops") {
  const char* src = R"(
@out = global i32 0
define void @main() {
init:
  br label %outer

outer:
  %i = phi i32 [ 0, %init ], [ %i1, %olatch ]
  %oc = icmp ult i32 %i, 2
  br i1 %oc, label %inner, label %done

inner:
  %j = phi i32 [ 0, %outer ], [ %j1, %inner ]
  %s = add i32 %i, %j
  store i32 %s, i32* @out
  %j1 = add i32 %j, 1
  %ic = icmp ne i32 %j1, 3
  br i1 %ic, label %inner, label %olatch

olatch:
  %i1 = add i32 %i, 1
  br label %outer

done:
  %last = add i32 %i, 100
  store i32 %last, i32* @out
  ret void
}
)";
  const auto m = parse_checked(src);
  auto r = unroll_loops(m, 4);
  require_typed(r.module);
  CHECK(r.complete());
  CHECK(loop_free_but_trap(r.module.functions[0]));
  CHECK(visible_trace(m, 500) == visible_trace(r.module, 500));
}

TEST_CASE("unroll leaves loop-free code alone and rejects irreducible loops") {
  const auto plain = parse_checked("define void @main() {\ninit:\n  ret void\n}\n");
  auto r = unroll_loops(plain, 5);
  CHECK(r.loops.empty());
  CHECK(r.complete());
  CHECK(ir::print_module(r.module) == ir::print_module(plain));

  const char* irreducible = R"(
define void @main() {
init:
  %c = icmp eq i32 1, 1
  br i1 %c, label %a, label %b

a:
  br label %b

b:
  br label %a
}
)";
  CHECK_THROWS_WITH_AS(unroll_loops(parse_checked(irreducible), 2),
                       doctest::Contains("cannot unroll irreducible loop"), UnrollError);
}

TEST_CASE("counted loops unroll to the same trace or a prefix of it") {
  int complete = 0, cut = 0;
  for (int start : {0, 3})
    for (int step : {1, 2})
      for (int bound : {1, 4, 7})
        for (const char* pred : {"slt", "ult", "ne", "sle"})
          for (bool on_update : {false, true}) {
            if (std::string(pred) == "ne" && (bound - start) % step != 0)
              continue;
            const std::string cmp_on = on_update ? "%next" : "%i";
            const std::string src =
                "@out = global i32 0\n"
                "define void @main() {\ninit:\n  br label %loop\n\nloop:\n"
                "  %i = phi i32 [ " + std::to_string(start) + ", %init ], [ %next, %loop ]\n"
                "  store i32 %i, i32* @out\n"
                "  %next = add i32 %i, " + std::to_string(step) + "\n"
                "  %c = icmp " + pred + " i32 " + cmp_on + ", " + std::to_string(bound) + "\n"
                "  br i1 %c, label %loop, label %done\n\ndone:\n"
                "  store i32 %next, i32* @out\n  ret void\n}\n";
            CAPTURE(src);
            const auto m = parse_checked(src);
            const auto full = visible_trace(m, 400);
            for (unsigned n : {1u, 2u, 5u}) {
              auto r = unroll_loops(m, n);
              require_typed(r.module);
              REQUIRE(r.loops.size() == 1);
              CAPTURE(n);
              const auto t = visible_trace(r.module, 400);
              if (r.complete()) {
                ++complete;
                CHECK(t == full);
              } else {
                ++cut;
                // the stub's call, n full rounds, then the trap forever
                REQUIRE(t.size() > n + 1);
                CHECK(std::equal(t.begin(), t.begin() + n + 1, full.begin()));
                for (std::size_t i = n + 1; i < t.size(); ++i)
                  REQUIRE(t[i] == "call __lodin_unroll_bound");
              }
            }
          }
  CHECK(complete > 0);
  CHECK(cut > 0);
}
