#pragma once

#include "lodin/ir.hpp"

#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace lodin {

using RegVarId = std::uint32_t;

enum class ErrorKind : std::uint8_t {
  None,
  DivByZero,       // integer division whose divisor is zero
  MemoryError,     // access to a freed block or beyond a block's end
  InvalidFree,     // free of a non-base or dead pointer
  UndefinedResult, // full-domain result that is too wide to enumerate
  Fault,           // any other context-level failure (unset register, bad width)
};

const char* error_kind_name(ErrorKind k);

/// Raised by context operations. The engine turns it into an absorbing error state.
class ContextError : public std::runtime_error {
public:
  ContextError(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

/// Marker for an operation whose result is every value of a `bits`-wide type.
struct FullDomain {
  unsigned bits = 0;
};

template <class V>
using ValueOrDomain = std::variant<V, FullDomain>;

template <class S, class V>
struct CmpOutcome {
  S state;
  V value;
  bool truth = false;
};

template <class S>
struct BranchOutcome {
  S state;
  bool truth = false;
};

/// The operations the interpreter needs from a value/memory representation.
/// States are values: operations mutate a caller-owned copy.
template <class C>
concept Context = requires(const C& c, typename C::State& s, const typename C::State& cs,
                           const typename C::Value& v, const ir::Type& t, RegVarId id,
                           ir::Opcode op, ir::CmpPred pred, std::uint64_t k,
                           std::int64_t off, const std::vector<std::uint8_t>& bytes) {
  typename C::State;
  typename C::Value;
  { c.initial() } -> std::same_as<typename C::State>;
  { c.make_reg(s, t) } -> std::same_as<RegVarId>;
  { c.release_reg(s, id) };
  { c.eval_reg(cs, id, t) } -> std::same_as<typename C::Value>;
  { c.set_reg(s, id, v, t) };
  { c.constant(t, k) } -> std::same_as<typename C::Value>;
  { c.domain_value(k, k) } -> std::same_as<typename C::Value>;
  { c.alloc(s, t) } -> std::same_as<typename C::Value>;
  { c.free(s, v) };
  { c.load(cs, v, t) } -> std::same_as<typename C::Value>;
  { c.store(s, v, v, t) };
  { c.init_bytes(s, v, bytes) };
  { c.nondet(s, t) } -> std::same_as<ValueOrDomain<typename C::Value>>;
  { c.ptr_add(v, off) } -> std::same_as<typename C::Value>;
  { c.ptr_index(v, v, t, k) } -> std::same_as<typename C::Value>;
  { c.binop(s, op, v, v, t) } -> std::same_as<ValueOrDomain<typename C::Value>>;
  { c.cmp(cs, pred, v, v, t) } -> std::same_as<std::vector<CmpOutcome<typename C::State, typename C::Value>>>;
  { c.branch(cs, v) } -> std::same_as<std::vector<BranchOutcome<typename C::State>>>;
};

} // namespace lodin
