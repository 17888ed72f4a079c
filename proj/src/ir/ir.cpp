#include "lodin/ir.hpp"

#include <stdexcept>

namespace lodin::ir {

namespace {

struct OpName {
  Opcode op;
  const char* name;
};

constexpr OpName kOpNames[] = {
    {Opcode::Add, "add"},       {Opcode::Sub, "sub"},       {Opcode::Mul, "mul"},
    {Opcode::UDiv, "udiv"},     {Opcode::SDiv, "sdiv"},     {Opcode::URem, "urem"},
    {Opcode::SRem, "srem"},     {Opcode::Shl, "shl"},       {Opcode::LShr, "lshr"},
    {Opcode::AShr, "ashr"},     {Opcode::And, "and"},       {Opcode::Or, "or"},
    {Opcode::Xor, "xor"},       {Opcode::Alloca, "alloca"}, {Opcode::Gep, "getelementptr"},
    {Opcode::Load, "load"},     {Opcode::Store, "store"},   {Opcode::ICmp, "icmp"},
    {Opcode::RetVoid, "ret"},   {Opcode::Ret, "ret"},       {Opcode::Br, "br"},
    {Opcode::CondBr, "br"},     {Opcode::Phi, "phi"},       {Opcode::Call, "call"},
    {Opcode::Nondet, "nondet"},
};

constexpr const char* kPredNames[] = {"eq",  "ne",  "uge", "ugt", "ule",
                                      "ult", "sge", "sgt", "sle", "slt"};

} // namespace

InstrClass classify(Opcode op) {
  switch (op) {
  case Opcode::Add:
  case Opcode::Sub:
  case Opcode::Mul:
  case Opcode::UDiv:
  case Opcode::SDiv:
  case Opcode::URem:
  case Opcode::SRem:
    return InstrClass::Arith;
  case Opcode::Shl:
  case Opcode::LShr:
  case Opcode::AShr:
  case Opcode::And:
  case Opcode::Or:
  case Opcode::Xor:
    return InstrClass::Logic;
  case Opcode::Alloca:
  case Opcode::Gep:
  case Opcode::Load:
  case Opcode::Store:
    return InstrClass::Mem;
  case Opcode::ICmp:
    return InstrClass::Cmp;
  case Opcode::RetVoid:
  case Opcode::Ret:
  case Opcode::Br:
  case Opcode::CondBr:
    return InstrClass::Term;
  case Opcode::Phi:
    return InstrClass::Phi;
  case Opcode::Call:
    return InstrClass::Call;
  case Opcode::Nondet:
    return InstrClass::Lodin;
  }
  return InstrClass::Lodin;
}

bool is_binary(Opcode op) {
  const auto c = classify(op);
  return c == InstrClass::Arith || c == InstrClass::Logic;
}

bool is_terminator(Opcode op) { return classify(op) == InstrClass::Term; }

bool is_division(Opcode op) {
  return op == Opcode::UDiv || op == Opcode::SDiv || op == Opcode::URem || op == Opcode::SRem;
}

const char* opcode_name(Opcode op) {
  for (const auto& e : kOpNames)
    if (e.op == op)
      return e.name;
  return "?";
}

const char* pred_name(CmpPred p) { return kPredNames[static_cast<int>(p)]; }

std::optional<Opcode> binary_from_name(const std::string& s) {
  for (const auto& e : kOpNames)
    if (is_binary(e.op) && s == e.name)
      return e.op;
  return std::nullopt;
}

std::optional<CmpPred> pred_from_name(const std::string& s) {
  for (int i = 0; i < 10; ++i)
    if (s == kPredNames[i])
      return static_cast<CmpPred>(i);
  return std::nullopt;
}

std::size_t Block::phi_end() const {
  std::size_t i = 0;
  while (i < instrs.size() && instrs[i].op == Opcode::Phi)
    ++i;
  return i;
}

std::optional<BlockIdx> Func::find_block(const std::string& label) const {
  for (std::size_t i = 0; i < blocks.size(); ++i)
    if (blocks[i].label == label)
      return static_cast<BlockIdx>(i);
  return std::nullopt;
}

std::optional<RegIdx> Func::find_reg(const std::string& n) const {
  for (std::size_t i = 0; i < regs.size(); ++i) {
    const auto k = regs[i].kind;
    if ((k == RegKind::Value || k == RegKind::Param) && regs[i].name == n)
      return static_cast<RegIdx>(i);
  }
  return std::nullopt;
}

RegIdx Func::constant_reg(const Type& t, std::uint64_t value) {
  const unsigned w = t.is_int() ? t.bits() : 64;
  value = truncate(value, w);
  for (std::size_t i = 0; i < regs.size(); ++i)
    if (regs[i].kind == RegKind::Constant && regs[i].type == t && regs[i].constant == value)
      return static_cast<RegIdx>(i);
  RegInfo r;
  r.type = t;
  r.kind = RegKind::Constant;
  r.constant = value;
  if (t.is_ptr()) {
    r.name = value == 0 ? "null" : std::to_string(value);
  } else {
    // Print signed when the top bit is set so literals read naturally.
    const bool neg = w < 64 ? (value >> (w - 1)) & 1 : (value >> 63) & 1;
    if (neg) {
      const auto mag = w < 64 ? ((~value + 1) & ((std::uint64_t{1} << w) - 1)) : (~value + 1);
      r.name = "-" + std::to_string(mag);
    } else {
      r.name = std::to_string(value);
    }
  }
  regs.push_back(std::move(r));
  return static_cast<RegIdx>(regs.size() - 1);
}

RegIdx Func::global_reg(const Type& t, std::int32_t g, const std::string& n) {
  for (std::size_t i = 0; i < regs.size(); ++i)
    if (regs[i].kind == RegKind::Global && regs[i].global == g && regs[i].type == t)
      return static_cast<RegIdx>(i);
  RegInfo r;
  r.name = n;
  r.type = t;
  r.kind = RegKind::Global;
  r.global = g;
  regs.push_back(std::move(r));
  return static_cast<RegIdx>(regs.size() - 1);
}

RegIdx Func::add_value_reg(const std::string& n, const Type& t, RegKind kind) {
  RegInfo r;
  r.name = n;
  r.type = t;
  r.kind = kind;
  regs.push_back(std::move(r));
  assign_slots();
  return static_cast<RegIdx>(regs.size() - 1);
}

void Func::assign_slots() {
  std::int32_t next = 0;
  for (auto& r : regs)
    r.slot = (r.kind == RegKind::Value || r.kind == RegKind::Param) ? next++ : -1;
}

std::int32_t Func::num_slots() const {
  std::int32_t n = 0;
  for (const auto& r : regs)
    if (r.slot >= 0)
      ++n;
  return n;
}

std::optional<std::int32_t> Module::find_function(const std::string& n) const {
  for (std::size_t i = 0; i < functions.size(); ++i)
    if (functions[i].name == n)
      return static_cast<std::int32_t>(i);
  return std::nullopt;
}

std::optional<std::int32_t> Module::find_global(const std::string& n) const {
  for (std::size_t i = 0; i < globals.size(); ++i)
    if (globals[i].name == n)
      return static_cast<std::int32_t>(i);
  return std::nullopt;
}

void Module::set_entry_points(const std::vector<std::string>& names) {
  entry_points.clear();
  for (const auto& n : names) {
    const auto f = find_function(n);
    if (!f || functions[static_cast<std::size_t>(*f)].is_declaration)
      throw std::invalid_argument("entry point @" + n + " is not defined");
    const auto& fn = functions[static_cast<std::size_t>(*f)];
    if (!fn.params.empty() || !fn.ret_type.is_void())
      throw std::invalid_argument("entry point @" + n +
                                  " must take no parameters and return void");
    entry_points.push_back(*f);
  }
}

std::uint64_t truncate(std::uint64_t v, unsigned bits) {
  if (bits >= 64)
    return v;
  return v & ((std::uint64_t{1} << bits) - 1);
}

} // namespace lodin::ir
