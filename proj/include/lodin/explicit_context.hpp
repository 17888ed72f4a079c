#pragma once

#include "lodin/bitvec.hpp"
#include "lodin/context.hpp"

#include <memory>
#include <string>
#include <vector>

namespace lodin {

/// Block/offset memory. Block index in the high 32 bits of a pointer, byte
/// offset in the low 32. Freed blocks are null; new blocks take the lowest free index.
class MemState {
public:
  using Bytes = std::vector<std::uint8_t>;

  std::uint32_t alloc(std::uint64_t size);
  void free(std::uint32_t block);
  bool live(std::uint32_t block) const;
  std::uint64_t size(std::uint32_t block) const;
  /// Little-endian read of `len` bytes at byte offset `off`.
  BitVec read(std::uint32_t block, std::uint64_t off, unsigned len) const;
  void write(std::uint32_t block, std::uint64_t off, const BitVec& v);
  void write_bytes(std::uint32_t block, std::uint64_t off, const Bytes& bytes);
  /// True when [off, off+len) lies inside a live block.
  bool in_bounds(std::uint32_t block, std::uint64_t off, std::uint64_t len) const;
  std::size_t block_count() const { return blocks_.size(); }
  const Bytes* block(std::uint32_t b) const;

  void serialize(std::string& out) const;
  friend bool operator==(const MemState& a, const MemState& b);

private:
  Bytes& writable(std::uint32_t block);

  std::vector<std::shared_ptr<const Bytes>> blocks_;
};

struct ExplicitPtr {
  std::uint32_t block;
  std::uint32_t offset;

  static ExplicitPtr from(const BitVec& p) {
    return {static_cast<std::uint32_t>(p.bits >> 32), static_cast<std::uint32_t>(p.bits)};
  }
  BitVec bits() const { return BitVec(64, (std::uint64_t{block} << 32) | offset); }
};

struct ExplicitState {
  MemState mem;
  /// Register store: 0 = unused id, 1 = allocated but unset, 2 = set.
  struct Slot {
    std::uint8_t tag = 0;
    std::uint8_t width = 0; // bytes
    std::uint64_t bits = 0;
  };
  std::vector<Slot> regs;

  friend bool operator==(const ExplicitState& a, const ExplicitState& b);
};

class ExplicitContext {
public:
  using State = ExplicitState;
  using Value = BitVec;

  State initial() const { return {}; }
  RegVarId make_reg(State& s, const ir::Type& t) const;
  void release_reg(State& s, RegVarId id) const;
  Value eval_reg(const State& s, RegVarId id, const ir::Type& t) const;
  /// Unset registers read as nothing; used by propositions, which default to zero.
  std::optional<Value> peek_reg(const State& s, RegVarId id) const;
  void set_reg(State& s, RegVarId id, const Value& v, const ir::Type& t) const;
  Value constant(const ir::Type& t, std::uint64_t k) const;
  Value domain_value(std::uint64_t bits, std::uint64_t k) const {
    return BitVec(static_cast<unsigned>(bits), k);
  }
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

  static Value true_value() { return BitVec(8, 1); }
  static Value false_value() { return BitVec(8, 0); }

  /// Canonical byte encoding, used for state hashing and equality.
  static void serialize(const State& s, std::string& out);
  static void serialize_value(const Value& v, std::string& out);
};

static_assert(Context<ExplicitContext>);

/// Value width in bits for a register or memory access of type t.
unsigned value_width(const ir::Type& t);

} // namespace lodin
