#include "lodin/props.hpp"

#include <cctype>

namespace lodin::props {

namespace {

std::int64_t signed_at(std::uint64_t v, unsigned bits) {
  if (bits >= 64)
    return static_cast<std::int64_t>(v);
  return static_cast<std::int64_t>(v << (64 - bits)) >> (64 - bits);
}

template <class T>
bool apply(CmpOp op, T a, T b) {
  switch (op) {
  case CmpOp::Eq:
    return a == b;
  case CmpOp::Ne:
    return a != b;
  case CmpOp::Lt:
    return a < b;
  case CmpOp::Le:
    return a <= b;
  case CmpOp::Gt:
    return a > b;
  case CmpOp::Ge:
    return a >= b;
  }
  return false;
}

} // namespace

std::uint64_t Evaluator::read(const Comparand& c, const Eng::State& s) const {
  if (!c.is_register)
    return c.number;
  if (c.proc < 0 || static_cast<std::size_t>(c.proc) >= s.procs.size())
    return 0;
  const auto& stack = s.procs[static_cast<std::size_t>(c.proc)];
  if (stack.empty())
    return 0;
  const auto& fr = stack.back();
  const auto& f = eng_.module().functions[static_cast<std::size_t>(fr.func)];
  if (f.name != c.func)
    return 0;
  auto r = f.find_reg(c.reg);
  if (!r && c.reg.size() > 1 && std::isdigit(static_cast<unsigned char>(c.reg[1])))
    r = f.find_reg("%r" + c.reg.substr(1)); // numbered registers are renamed at load time
  if (!r)
    return 0;
  const auto& ri = f.regs[static_cast<std::size_t>(*r)];
  const auto v = eng_.context().peek_reg(s.ctx, fr.regs[static_cast<std::size_t>(ri.slot)]);
  if (!v)
    return 0;
  const std::uint64_t raw = c.type.is_signed ? static_cast<std::uint64_t>(v->as_signed()) : v->bits;
  return ir::truncate(raw, c.type.bits);
}

std::optional<Evaluator::Access> Evaluator::pending_access(const Eng::State& s, std::size_t p) const {
  const ir::Instr* in = eng_.next_instr(s, p);
  if (!in || (in->op != ir::Opcode::Load && in->op != ir::Opcode::Store))
    return std::nullopt;
  const bool write = in->op == ir::Opcode::Store;
  try {
    const auto ptr = ExplicitPtr::from(eng_.eval_operand(s, p, in->ops[write ? 1 : 0]));
    return Access{ptr.block, ptr.offset, ir::bsize(in->type), write};
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

bool Evaluator::data_race(const Eng::State& s) const {
  std::vector<std::optional<Access>> acc;
  acc.reserve(s.procs.size());
  for (std::size_t p = 0; p < s.procs.size(); ++p)
    acc.push_back(pending_access(s, p));
  for (std::size_t i = 0; i < acc.size(); ++i) {
    if (!acc[i])
      continue;
    for (std::size_t j = i + 1; j < acc.size(); ++j) {
      if (!acc[j] || !(acc[i]->write || acc[j]->write) || acc[i]->block != acc[j]->block)
        continue;
      if (ranges_overlap(acc[i]->offset, acc[i]->len, acc[j]->offset, acc[j]->len))
        return true;
    }
  }
  return false;
}

bool Evaluator::div_zero(const Eng::State& s) const {
  for (std::size_t p = 0; p < s.procs.size(); ++p) {
    const ir::Instr* in = eng_.next_instr(s, p);
    if (!in || !ir::is_division(in->op))
      continue;
    try {
      if (eng_.eval_operand(s, p, in->ops[1]).bits == 0)
        return true;
    } catch (const std::exception&) {
    }
  }
  return false;
}

bool Evaluator::overflows(const Eng::State& s) const {
  for (std::size_t p = 0; p < s.procs.size(); ++p) {
    const auto a = pending_access(s, p);
    if (a && !s.ctx.mem.in_bounds(a->block, a->offset, a->len))
      return true;
  }
  return false;
}

bool Evaluator::call_site(const Eng::State& s, int proc, const std::string& func) const {
  if (proc < 0)
    return false;
  const ir::Instr* in = eng_.next_instr(s, static_cast<std::size_t>(proc));
  return in && in->op == ir::Opcode::Call && in->callee == func;
}

bool Evaluator::eval(const Prop& p, const Eng::State& s) const {
  switch (p.kind) {
  case Prop::Kind::True:
    return true;
  case Prop::Kind::False:
    return false;
  case Prop::Kind::Compare: {
    const auto a = read(p.lhs, s);
    const auto b = read(p.rhs, s);
    if (p.lhs.type.is_signed)
      return apply(p.op, signed_at(a, p.lhs.type.bits), signed_at(b, p.lhs.type.bits));
    return apply(p.op, a, b);
  }
  case Prop::Kind::DataRace:
    return data_race(s);
  case Prop::Kind::DivZero:
    return div_zero(s);
  case Prop::Kind::Overflows:
    return overflows(s);
  case Prop::Kind::CallSite:
    return call_site(s, p.proc, p.func);
  case Prop::Kind::And:
    return eval(*p.a, s) && eval(*p.b, s);
  case Prop::Kind::Or:
    return eval(*p.a, s) || eval(*p.b, s);
  case Prop::Kind::Not:
    return !eval(*p.a, s);
  }
  return false;
}

} // namespace lodin::props
