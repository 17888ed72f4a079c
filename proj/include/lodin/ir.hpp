#pragma once

#include "lodin/type.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lodin::ir {

enum class Opcode : std::uint8_t {
  // arithmetic
  Add, Sub, Mul, UDiv, SDiv, URem, SRem,
  // logic
  Shl, LShr, AShr, And, Or, Xor,
  // memory
  Alloca, Gep, Load, Store,
  ICmp,
  // terminators
  RetVoid, Ret, Br, CondBr,
  Phi, Call, Nondet,
};

enum class CmpPred : std::uint8_t { Eq, Ne, Uge, Ugt, Ule, Ult, Sge, Sgt, Sle, Slt };

enum class InstrClass : std::uint8_t { Arith, Logic, Mem, Cmp, Term, Phi, Call, Lodin };

InstrClass classify(Opcode op);
bool is_binary(Opcode op);
bool is_terminator(Opcode op);
bool is_division(Opcode op);
const char* opcode_name(Opcode op);
const char* pred_name(CmpPred p);
std::optional<Opcode> binary_from_name(const std::string& s);
std::optional<CmpPred> pred_from_name(const std::string& s);

struct SourcePos {
  int line = 0;
  int col = 0;
};

using RegIdx = std::int32_t;
using BlockIdx = std::int32_t;

struct Instr {
  Opcode op = Opcode::RetVoid;
  CmpPred pred = CmpPred::Eq;
  RegIdx result = -1;
  /// Operation type: operand type of binops/icmp/phi/ret/store/load, allocated
  /// type of alloca, source element type of gep, callee return type of call.
  Type type;
  /// Operand registers. gep: base then indices; store: value then pointer;
  /// load: pointer; condbr: condition; phi: incoming values.
  std::vector<RegIdx> ops;
  /// br: target(s) (true first); phi: incoming blocks parallel to ops.
  std::vector<BlockIdx> labels;
  std::string callee;
  SourcePos pos;
};

enum class RegKind : std::uint8_t { Value, Param, Constant, Global, ConstExpr };

struct RegInfo {
  std::string name; // "%x" for values, literal text for constants
  Type type;
  RegKind kind = RegKind::Value;
  std::uint64_t constant = 0; // Constant: bit pattern, truncated to width
  std::int32_t global = -1;   // Global: module global index
  std::shared_ptr<Instr> cexpr; // ConstExpr: defining expression (no result)
  /// Frame slot for Value/Param registers, -1 otherwise.
  std::int32_t slot = -1;
};

struct Block {
  std::string label;
  std::vector<Instr> instrs;

  /// Index of the first instruction that is not a phi.
  std::size_t phi_end() const;
};

struct Func {
  std::string name;
  Type ret_type;
  std::vector<RegIdx> params;
  std::vector<RegInfo> regs;
  std::vector<Block> blocks; // blocks[0] is the entry block
  bool is_declaration = false;
  bool is_vararg = false;
  SourcePos pos;

  std::optional<BlockIdx> find_block(const std::string& label) const;
  std::optional<RegIdx> find_reg(const std::string& name) const;
  /// Register for a constant of the given type, created on demand.
  RegIdx constant_reg(const Type& t, std::uint64_t value);
  RegIdx global_reg(const Type& t, std::int32_t global, const std::string& name);
  RegIdx add_value_reg(const std::string& name, const Type& t, RegKind kind = RegKind::Value);
  /// Recomputes frame slots so Value/Param registers are numbered densely.
  void assign_slots();
  std::int32_t num_slots() const;
  /// `main.%x`: the module-wide unique name of a register.
  std::string qualified(RegIdx r) const { return name + "." + regs[static_cast<std::size_t>(r)].name; }
};

struct Global {
  std::string name; // "@g"
  Type type;        // stored value type; the symbol itself is a pointer to it
  /// Initial bytes, little endian; empty means zero-filled.
  std::vector<std::uint8_t> init;
};

struct Module {
  std::vector<Func> functions;
  std::vector<Global> globals;
  std::map<std::string, Type> named_types;
  std::vector<std::int32_t> entry_points;

  std::optional<std::int32_t> find_function(const std::string& name) const;
  std::optional<std::int32_t> find_global(const std::string& name) const;
  /// Resolves entry point names; throws std::invalid_argument on failure.
  void set_entry_points(const std::vector<std::string>& names);
};

/// Truncates a value to the low `bits` bits (bits <= 64).
std::uint64_t truncate(std::uint64_t v, unsigned bits);

} // namespace lodin::ir
