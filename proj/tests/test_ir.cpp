#include "doctest.h"

#include "lodin/cfg.hpp"
#include "lodin/parser.hpp"
#include "lodin/printer.hpp"
#include "lodin/typecheck.hpp"
#include "test_util.hpp"

#include <random>

using namespace lodin;
using namespace lodin::ir;

namespace {

bool has_rule(const std::vector<TypeCheckError>& errs, const std::string& rule) {
  for (const auto& e : errs)
    if (e.rule == rule)
      return true;
  return false;
}

std::set<std::string> pred_labels(const Func& f, const CfgInfo& c, const std::string& l) {
  std::set<std::string> out;
  for (auto p : c.preds[static_cast<std::size_t>(*f.find_block(l))])
    out.insert(f.blocks[static_cast<std::size_t>(p)].label);
  return out;
}

} // namespace

TEST_CASE("bsize") {
  CHECK(bsize(Type::integer(32)) == 4);
  CHECK(bsize(Type::pointer(Type::integer(8))) == 8);
  CHECK(bsize(Type::structure({Type::integer(32), Type::integer(16), Type::pointer(Type::integer(8))})) == 14);
  CHECK_THROWS_AS(bsize(Type::void_type()), TypeError);
  CHECK_THROWS_AS(Type::integer(12), TypeError);
  CHECK(bsize(Type::integer(24)) == 3);
}

TEST_CASE("type offset") {
  const auto s = Type::structure({Type::integer(32), Type::integer(16)});
  std::vector<std::int64_t> p01{0, 1};
  auto r = type_offset(s, p01);
  CHECK(r.offset == 4);
  CHECK(r.element == Type::integer(16));
  std::vector<std::int64_t> p0{0};
  r = type_offset(Type::integer(32), p0);
  CHECK(r.offset == 0);
  CHECK(r.element == Type::integer(32));
  std::vector<std::int64_t> p10{1, 0};
  r = type_offset(s, p10);
  CHECK(r.offset == 6);
  CHECK(r.element == Type::integer(32));
  std::vector<std::int64_t> bad{0, 2};
  CHECK_THROWS_AS(type_offset(s, bad), TypeError);
  std::vector<std::int64_t> nonstruct{0, 0};
  CHECK_THROWS_AS(type_offset(Type::integer(32), nonstruct), TypeError);
}

TEST_CASE("type offset stays inside the indexed element") {
  // Nested structs; every in-range path must land inside its stride.
  const auto inner = Type::structure({Type::integer(8), Type::integer(32)});
  const auto t = Type::structure({Type::integer(16), inner, Type::pointer(Type::integer(8))});
  for (std::int64_t i1 = 0; i1 < 3; ++i1) {
    for (std::int64_t a = 0; a < 3; ++a) {
      std::vector<std::int64_t> path{i1, a};
      auto r = type_offset(t, path);
      CHECK(r.offset + static_cast<std::int64_t>(bsize(r.element)) <=
            static_cast<std::int64_t>(bsize(t)) * (1 + i1));
      if (a == 1) {
        for (std::int64_t b = 0; b < 2; ++b) {
          std::vector<std::int64_t> deep{i1, 1, b};
          auto d = type_offset(t, deep);
          CHECK(d.offset + static_cast<std::int64_t>(bsize(d.element)) <=
                static_cast<std::int64_t>(bsize(t)) * (1 + i1));
        }
      }
    }
  }
}

TEST_CASE("parse the swap loop") {
  const auto m = parse_module(test::read_corpus("swap.ll"));
  REQUIRE(m.functions.size() == 1);
  const auto& f = m.functions[0];
  CHECK(f.name == "main");
  REQUIRE(f.blocks.size() == 3);
  CHECK(f.blocks[0].label == "init");
  CHECK(f.blocks[1].label == "blk");
  CHECK(f.blocks[2].label == "succ");
  CHECK(f.blocks[1].phi_end() == 2);
  CHECK(f.blocks[1].instrs.back().op == Opcode::CondBr);
  CHECK(f.regs[static_cast<std::size_t>(*f.find_reg("%b"))].type == Type::integer(8));
  CHECK(type_check(m).empty());
}

TEST_CASE("parse errors") {
  CHECK_THROWS_WITH_AS(parse_module(""), doctest::Contains("no module"), ParseError);
  CHECK_THROWS_AS(parse_module("define void @f() {\ninit:\n  frobnicate i32 1\n}"), ParseError);
  try {
    parse_module("define void @f() {\ninit:\n  ret void\ninit:\n  ret void\n}");
    FAIL("duplicate label accepted");
  } catch (const ParseError& e) {
    CHECK(e.line() == 4);
    CHECK(e.message().find("duplicate label") != std::string::npos);
  }
  try {
    parse_module("define void @f() {\ninit:\n  %x = frob i32 1\n  ret void\n}");
    FAIL("unknown opcode accepted");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.col() == 8);
    CHECK(e.message().find("unknown opcode") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_module("define void @f() {\ninit:\n  br label %nowhere\n}"), ParseError);
  CHECK_THROWS_AS(parse_module("define void @f() {\ninit:\n  %x = add i32 1, 2\n  %x = add i32 1, 2\n  ret void\n}"), ParseError);
}

TEST_CASE("minimal function") {
  const auto m = parse_module("define void @f(){ init: ret void }");
  REQUIRE(m.functions.size() == 1);
  CHECK(m.functions[0].blocks.size() == 1);
  CHECK(m.functions[0].ret_type.is_void());
}

TEST_CASE("attributes and metadata are ignored") {
  const char* src = R"(
source_filename = "x.c"
target triple = "x86_64-pc-linux-gnu"
%struct.S = type { i32, i16 }
@g = dso_local global %struct.S zeroinitializer, align 4
define dso_local i32 @f(i32 noundef %a) #0 {
  %p = getelementptr inbounds %struct.S, %struct.S* @g, i32 0, i32 1
  %v = load i16, i16* %p, align 2, !tbaa !3
  %s = add nsw i32 %a, 1
  ret i32 %s
}
attributes #0 = { noinline nounwind }
!3 = !{}
)";
  const auto m = parse_module(src);
  CHECK(type_check(m).empty());
  CHECK(m.globals.size() == 1);
}

TEST_CASE("print round trip") {
  for (const char* name : {"swap.ll", "symbneed.ll", "peterson.ll"}) {
    CAPTURE(name);
    const auto m1 = parse_module(test::read_corpus(name));
    const auto t1 = print_module(m1);
    const auto m2 = parse_module(t1);
    const auto t2 = print_module(m2);
    CHECK(t1 == t2);
    CHECK(type_check(m2).empty());
  }
  const char* cexpr = R"(
@g = global { i32, i32 } { i32 1, i32 -2 }
define void @main() {
  store i32 add (i32 mul (i32 2, i32 3), i32 4), i32* getelementptr ({ i32, i32 }, { i32, i32 }* @g, i32 0, i32 1)
  ret void
}
)";
  const auto m1 = parse_module(cexpr);
  const auto t1 = print_module(m1);
  CHECK(print_module(parse_module(t1)) == t1);
  CHECK(type_check(m1).empty());
}

TEST_CASE("type rules") {
  SUBCASE("compare result is i8") {
    const auto m = parse_module("define void @f(i32 %x, i32 %z) {\n  %b = icmp eq i32 %x, %z\n  ret void\n}");
    CHECK(type_check(m).empty());
  }
  SUBCASE("binary width mismatch") {
    const auto m = parse_module("define void @f(i32 %a, i16 %b) {\n  %c = add i32 %a, %b\n  ret void\n}");
    CHECK(has_rule(type_check(m), "Binary"));
  }
  SUBCASE("gep projection") {
    const char* ok = "define void @f({ i32, i16 }* %p) {\n  %q = getelementptr { i32, i16 }, { i32, i16 }* %p, i32 0, i32 1\n  store i16 7, i16* %q\n  ret void\n}";
    CHECK(type_check(parse_module(ok)).empty());
    const char* bad2 = "define void @f({ i32, i16 }* %p) {\ninit:\n  %r = getelementptr { i32, i16 }, { i32, i16 }* %p, i32 0, i32 1\n  br label %next\nnext:\n  %s = phi i32* [ %r, %init ]\n  ret void\n}";
    const auto errs = type_check(parse_module(bad2));
    CHECK(has_rule(errs, "Phi"));
  }
  SUBCASE("return mismatch") {
    const auto m = parse_module("define i32 @f() {\n  ret void\n}");
    CHECK(has_rule(type_check(m), "Return"));
  }
  SUBCASE("load/store") {
    const auto m = parse_module("define void @f(i32* %p) {\n  %v = load i16, i32* %p\n  store i16 %v, i32* %p\n  ret void\n}");
    const auto errs = type_check(m);
    CHECK(has_rule(errs, "Load"));
    CHECK(has_rule(errs, "Store"));
  }
  SUBCASE("call arity") {
    const auto m = parse_module("define void @g(i32 %a) {\n  ret void\n}\ndefine void @f() {\n  call void @g()\n  ret void\n}");
    CHECK(has_rule(type_check(m), "Call"));
  }
}

TEST_CASE("gep result type check") {
  // Build the ill-typed gep directly: the result register claims i32*.
  auto m = parse_module("define void @f({ i32, i16 }* %p) {\n  %q = getelementptr { i32, i16 }, { i32, i16 }* %p, i32 0, i32 1\n  ret void\n}");
  auto& f = m.functions[0];
  CHECK(type_check(m).empty());
  f.regs[static_cast<std::size_t>(*f.find_reg("%q"))].type = Type::pointer(Type::integer(32));
  CHECK(has_rule(type_check(m), "GEP"));
}

TEST_CASE("cfg of the swap loop") {
  const auto m = parse_module(test::read_corpus("swap.ll"));
  const auto& f = m.functions[0];
  const auto c = analyze_cfg(f);
  CHECK(pred_labels(f, c, "blk") == std::set<std::string>{"init", "blk"});
  CHECK(c.converging(*f.find_block("blk")));
  REQUIRE(c.loops.size() == 1);
  CHECK(c.loops[0].header == *f.find_block("blk"));
  CHECK(c.loops[0].body.size() == 1);
  CHECK(c.reducible);
}

TEST_CASE("cfg straight line and diamond") {
  const auto m1 = parse_module("define void @f() {\n  ret void\n}");
  const auto c1 = analyze_cfg(m1.functions[0]);
  CHECK(c1.loops.empty());
  CHECK(c1.preds[0].empty());

  const char* diamond = R"(
define void @f(i8 %c) {
init:
  br i8 %c, label %a, label %b
a:
  br label %join
b:
  br label %join
join:
  ret void
}
)";
  const auto m2 = parse_module(diamond);
  const auto& f = m2.functions[0];
  const auto c2 = analyze_cfg(f);
  CHECK(pred_labels(f, c2, "join") == std::set<std::string>{"a", "b"});
  CHECK(c2.converging(*f.find_block("join")));
  CHECK_FALSE(c2.converging(*f.find_block("a")));
  CHECK(c2.dominates(0, *f.find_block("join")));
  CHECK_FALSE(c2.dominates(*f.find_block("a"), *f.find_block("join")));
}

TEST_CASE("irreducible and unreachable") {
  const char* src = R"(
define void @f(i8 %c) {
init:
  br i8 %c, label %a, label %b
a:
  br label %b
b:
  br label %a
dead:
  ret void
}
)";
  const auto m = parse_module(src);
  const auto c = analyze_cfg(m.functions[0]);
  CHECK_FALSE(c.reducible);
  CHECK(c.unreachable_blocks() == std::vector<BlockIdx>{3});
}

namespace {

// Random well-formed functions: forward branches plus optional back edges.
std::string random_function(std::mt19937& rng, int blocks) {
  std::string s = "define void @f(i8 %c) {\n";
  int reg = 0;
  for (int b = 0; b < blocks; ++b) {
    s += "b" + std::to_string(b) + ":\n";
    const int n = static_cast<int>(rng() % 3);
    for (int i = 0; i < n; ++i, ++reg)
      s += "  %v" + std::to_string(reg) + " = add i32 " + std::to_string(rng() % 9) + ", 1\n";
    if (b == blocks - 1) {
      s += "  ret void\n";
    } else {
      const int t1 = b + 1 + static_cast<int>(rng() % static_cast<unsigned>(blocks - b - 1));
      const int t2 = static_cast<int>(rng() % static_cast<unsigned>(blocks));
      s += "  br i8 %c, label %b" + std::to_string(t1) + ", label %b" + std::to_string(t2) + "\n";
    }
  }
  return s + "}\n";
}

} // namespace

TEST_CASE("property: In() sizes and SSA over generated functions") {
  std::mt19937 rng(7);
  for (int iter = 0; iter < 200; ++iter) {
    const auto text = random_function(rng, 2 + static_cast<int>(rng() % 8));
    const auto m = parse_module(text);
    const auto& f = m.functions[0];
    const auto c = analyze_cfg(f);
    std::size_t in_total = 0;
    std::size_t out_total = 0;
    for (std::size_t b = 0; b < f.blocks.size(); ++b) {
      in_total += c.preds[b].size();
      out_total += successors(f.blocks[b]).size();
      CHECK((c.preds[b].size() > 1) == c.converging(static_cast<BlockIdx>(b)));
    }
    CHECK(in_total == out_total);
    std::map<RegIdx, int> defs;
    for (const auto& b : f.blocks)
      for (const auto& in : b.instrs)
        if (in.result >= 0)
          CHECK(++defs[in.result] == 1);
    CHECK(print_module(parse_module(print_module(m))) == print_module(m));
  }
}
