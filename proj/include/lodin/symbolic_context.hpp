#pragma once

#include "lodin/context.hpp"
#include "lodin/smt.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace lodin {

/// Two states that cannot be merged: a register id is bound to different variables.
class MergeError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A register variable was assigned twice.
class SsaError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// One conjunct of a path formula; the list is shared between successors.
struct PathNode {
  smt::Expr fact;
  std::shared_ptr<const PathNode> next;
  std::size_t size = 1;
};

struct SymbolicState {
  struct Slot {
    bool used = false;
    bool set = false;
    std::uint32_t gen = 0; // how many variables this id has been bound to
    unsigned width = 0;
    smt::Expr var;
    smt::Expr value; // var, or the constant it was set to
  };
  std::vector<Slot> regs;
  smt::Expr mem;      // x_M
  smt::Expr mem_view; // the same memory with known stores spelled out, for folding loads
  smt::Expr free_ptr; // x_f; stays a constant while allocation is deterministic
  std::shared_ptr<const PathNode> path;
  std::uint32_t mem_count = 0;
  std::uint32_t free_count = 0;
  std::uint32_t nondet_count = 0;
  std::uint32_t guard_count = 0;

  /// The path formula ψ as one conjunction (true when empty).
  smt::Expr path_formula() const;
  std::size_t path_size() const { return path ? path->size : 0; }
  /// Conjoins a fact; `true` is dropped.
  void assume(const smt::Expr& fact);
};

class SymbolicContext {
public:
  using State = SymbolicState;
  using Value = smt::Expr;

  /// First address handed out by the bump allocator.
  static constexpr std::uint64_t kHeapBase = 0x1000;

  State initial() const;
  RegVarId make_reg(State& s, const ir::Type& t) const;
  void release_reg(State& s, RegVarId id) const;
  Value eval_reg(const State& s, RegVarId id, const ir::Type& t) const;
  void set_reg(State& s, RegVarId id, const Value& v, const ir::Type& t) const;
  Value constant(const ir::Type& t, std::uint64_t k) const;
  Value domain_value(std::uint64_t bits, std::uint64_t k) const;
  Value alloc(State& s, const ir::Type& t) const;
  void free(State& s, const Value& ptr) const;
  Value load(const State& s, const Value& ptr, const ir::Type& t) const;
  void store(State& s, const Value& v, const Value& ptr, const ir::Type& t) const;
  void init_bytes(State& s, const Value& ptr, const std::vector<std::uint8_t>& bytes) const;
  ValueOrDomain<Value> nondet(State& s, const ir::Type& t) const;
  Value ptr_add(const Value& ptr, std::int64_t bytes) const;
  Value ptr_index(const Value& ptr, const Value& index, const ir::Type& index_type,
                  std::uint64_t stride) const;
  ValueOrDomain<Value> binop(State& s, ir::Opcode op, const Value& a, const Value& b,
                             const ir::Type& t) const;
  std::vector<CmpOutcome<State, Value>> cmp(const State& s, ir::CmpPred p, const Value& a,
                                            const Value& b, const ir::Type& t) const;
  std::vector<BranchOutcome<State>> branch(const State& s, const Value& cond) const;

  static Value true_value() { return smt::bv(8, 1); }
  static Value false_value() { return smt::bv(8, 0); }

  /// Joins two states reached along different paths. The result's path
  /// formula is the common prefix and a guarded disjunction of the two
  /// remainders; memory and free pointer become guard-selected fresh variables.
  static State merge(const State& a, const State& b);
};

static_assert(Context<SymbolicContext>);

} // namespace lodin
