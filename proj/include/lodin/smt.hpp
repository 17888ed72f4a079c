#pragma once

#include "lodin/bitvec.hpp"
#include "lodin/ir.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lodin::smt {

class SortError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

struct Sort {
  enum Kind : std::uint8_t { Bool, BV, Array };
  Kind kind = Bool;
  unsigned width = 0; // BV only; arrays map BitVec 64 to BitVec 8

  static Sort boolean() { return {Bool, 0}; }
  static Sort bv(unsigned w) { return {BV, w}; }
  static Sort array() { return {Array, 0}; }
  bool is_bool() const { return kind == Bool; }
  bool is_bv() const { return kind == BV; }
  bool is_array() const { return kind == Array; }
  std::string str() const;
  friend bool operator==(const Sort& a, const Sort& b) { return a.kind == b.kind && a.width == b.width; }
};

enum class Op : std::uint8_t {
  Var,
  BvConst,
  BoolConst,
  ConstArray, // every index maps to `value` (one byte)
  Not,
  And,
  Or,
  Ite,
  Eq,
  BvAnd,
  BvOr,
  BvXor,
  Shl,
  Lshr,
  Ashr,
  Add,
  Sub,
  Mul,
  Udiv,
  Sdiv,
  Urem,
  Srem,
  Ult,
  Ule,
  Ugt,
  Uge,
  Slt,
  Sle,
  Sgt,
  Sge,
  Concat,  // args[0] is the high part
  Extract, // bits [lo, lo + sort.width) of args[0]
  ZeroExt,
  SignExt,
  Select,
  Store,
};

const char* op_name(Op op);

struct Node;
using Expr = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::Var;
  Sort sort;
  std::vector<Expr> args;
  std::uint64_t value = 0; // constants
  unsigned lo = 0;         // Extract
  std::string name;        // Var
};

// Constructors check sorts and fold constants.
Expr var(const std::string& name, Sort s);
Expr bv(unsigned width, std::uint64_t value);
Expr bv(const BitVec& v);
Expr boolean(bool b);
Expr const_array(std::uint8_t byte);
Expr mk_not(const Expr& a);
Expr mk_and(std::vector<Expr> args);
Expr mk_or(std::vector<Expr> args);
Expr ite(const Expr& c, const Expr& a, const Expr& b);
Expr eq(const Expr& a, const Expr& b);
Expr neq(const Expr& a, const Expr& b);
/// Bitvector arithmetic/logic (BvAnd..Srem) and comparisons (Ult..Sge).
Expr apply(Op op, const Expr& a, const Expr& b);
Expr concat(const Expr& hi, const Expr& lo);
Expr extract(const Expr& a, unsigned lo, unsigned width);
Expr zext(const Expr& a, unsigned width);
Expr sext(const Expr& a, unsigned width);
Expr select(const Expr& arr, const Expr& idx);
Expr store(const Expr& arr, const Expr& idx, const Expr& val);

Op from_opcode(ir::Opcode op);
Op from_pred(ir::CmpPred p);
/// The comparison for an icmp predicate, eq and ne included.
Expr icmp(ir::CmpPred p, const Expr& a, const Expr& b);

inline bool is_const(const Expr& e) { return e->op == Op::BvConst || e->op == Op::BoolConst; }
inline bool is_true(const Expr& e) { return e->op == Op::BoolConst && e->value; }
inline bool is_false(const Expr& e) { return e->op == Op::BoolConst && !e->value; }

/// Free variables with their sorts.
void collect_vars(const Expr& e, std::map<std::string, Sort>& out);

/// Readable single term; shared subterms are repeated.
std::string to_string(const Expr& e);

/// A complete SMT-LIB v2 script for one satisfiability query. Subterms used
/// more than once are emitted once as define-fun.
std::string to_smtlib(const Expr& formula, bool want_model, unsigned timeout_ms = 0);

// ---- ground evaluation

struct ArrayValue {
  std::map<std::uint64_t, std::uint8_t> entries;
  std::uint8_t fallback = 0;
  std::uint8_t at(std::uint64_t i) const {
    auto it = entries.find(i);
    return it == entries.end() ? fallback : it->second;
  }
  friend bool operator==(const ArrayValue& a, const ArrayValue& b);
};

struct Assignment {
  std::map<std::string, std::uint64_t> scalars; // Bool as 0/1
  std::map<std::string, ArrayValue> arrays;
};

class EvalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Evaluates a boolean formula under a full assignment. Unassigned variables
/// are an EvalError.
bool mini_eval(const Expr& formula, const Assignment& a);

/// Brute-force satisfiability over every assignment of the free variables.
/// Only bitvector and boolean variables of at most 8 bits are allowed, at most
/// 2^24 assignments in total; anything larger is an EvalError.
std::optional<Assignment> mini_sat(const Expr& formula);

} // namespace lodin::smt
