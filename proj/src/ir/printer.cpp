#include "lodin/printer.hpp"

#include <sstream>

namespace lodin::ir {

namespace {

std::string print_typed(const Func& f, RegIdx r) {
  return f.regs[static_cast<std::size_t>(r)].type.str() + " " + print_operand(f, r);
}

std::string print_cexpr(const Func& f, const Instr& e) {
  std::string s;
  if (e.op == Opcode::Gep) {
    s = "getelementptr (" + e.type.str();
    for (auto o : e.ops)
      s += ", " + print_typed(f, o);
    return s + ")";
  }
  return std::string(opcode_name(e.op)) + " (" + print_typed(f, e.ops[0]) + ", " +
         print_typed(f, e.ops[1]) + ")";
}

std::string label(const Func& f, BlockIdx b) {
  return "%" + f.blocks[static_cast<std::size_t>(b)].label;
}

std::uint64_t read_bytes(const std::vector<std::uint8_t>& bytes, std::size_t at, std::size_t n) {
  std::uint64_t v = 0;
  for (std::size_t k = 0; k < n && k < 8; ++k)
    if (at + k < bytes.size())
      v |= std::uint64_t{bytes[at + k]} << (8 * k);
  return v;
}

void print_init(std::ostream& os, const Type& t, const std::vector<std::uint8_t>& bytes,
                std::size_t at) {
  if (t.is_struct()) {
    os << "{ ";
    std::size_t off = at;
    for (std::size_t i = 0; i < t.elements().size(); ++i) {
      const auto& e = t.elements()[i];
      if (i)
        os << ", ";
      os << e.str() << " ";
      print_init(os, e, bytes, off);
      off += bsize(e);
    }
    os << " }";
    return;
  }
  const auto v = read_bytes(bytes, at, bsize(t));
  if (t.is_ptr() && v == 0)
    os << "null";
  else
    os << v;
}

} // namespace

std::string print_operand(const Func& f, RegIdx r) {
  const auto& ri = f.regs[static_cast<std::size_t>(r)];
  if (ri.kind == RegKind::ConstExpr)
    return print_cexpr(f, *ri.cexpr);
  return ri.name;
}

std::string print_instr(const Func& f, const Instr& in) {
  std::string s;
  if (in.result >= 0)
    s = print_operand(f, in.result) + " = ";
  auto op = [&](std::size_t k) { return print_operand(f, in.ops[k]); };
  switch (in.op) {
  case Opcode::ICmp:
    return s + "icmp " + pred_name(in.pred) + " " + in.type.str() + " " + op(0) + ", " + op(1);
  case Opcode::Alloca:
    return s + "alloca " + in.type.str();
  case Opcode::Load:
    return s + "load " + in.type.str() + ", " + print_typed(f, in.ops[0]);
  case Opcode::Store:
    return s + "store " + in.type.str() + " " + op(0) + ", " + print_typed(f, in.ops[1]);
  case Opcode::Gep: {
    s += "getelementptr " + in.type.str();
    for (auto o : in.ops)
      s += ", " + print_typed(f, o);
    return s;
  }
  case Opcode::RetVoid:
    return "ret void";
  case Opcode::Ret:
    return "ret " + in.type.str() + " " + op(0);
  case Opcode::Br:
    return "br label " + label(f, in.labels[0]);
  case Opcode::CondBr:
    return "br i8 " + op(0) + ", label " + label(f, in.labels[0]) + ", label " +
           label(f, in.labels[1]);
  case Opcode::Phi: {
    s += "phi " + in.type.str() + " ";
    for (std::size_t k = 0; k < in.ops.size(); ++k) {
      if (k)
        s += ", ";
      s += "[ " + op(k) + ", " + label(f, in.labels[k]) + " ]";
    }
    return s;
  }
  case Opcode::Call: {
    s += "call " + in.type.str() + " @" + in.callee + "(";
    for (std::size_t k = 0; k < in.ops.size(); ++k) {
      if (k)
        s += ", ";
      s += print_typed(f, in.ops[k]);
    }
    return s + ")";
  }
  case Opcode::Nondet:
    return s + "nondet " + in.type.str();
  default:
    break;
  }
  return s + opcode_name(in.op) + " " + in.type.str() + " " + op(0) + ", " + op(1);
}

std::string print_function(const Module&, const Func& f) {
  std::ostringstream os;
  os << (f.is_declaration ? "declare " : "define ") << f.ret_type.str() << " @" << f.name
     << "(";
  for (std::size_t k = 0; k < f.params.size(); ++k) {
    if (k)
      os << ", ";
    os << print_typed(f, f.params[k]);
  }
  if (f.is_vararg)
    os << (f.params.empty() ? "..." : ", ...");
  os << ")";
  if (f.is_declaration) {
    os << "\n";
    return os.str();
  }
  os << " {\n";
  for (std::size_t b = 0; b < f.blocks.size(); ++b) {
    if (b)
      os << "\n";
    os << f.blocks[b].label << ":\n";
    for (const auto& in : f.blocks[b].instrs)
      os << "  " << print_instr(f, in) << "\n";
  }
  os << "}\n";
  return os.str();
}

std::string print_module(const Module& m) {
  std::ostringstream os;
  for (const auto& g : m.globals) {
    os << g.name << " = global " << g.type.str() << " ";
    if (g.init.empty())
      os << "zeroinitializer";
    else
      print_init(os, g.type, g.init, 0);
    os << "\n";
  }
  if (!m.globals.empty())
    os << "\n";
  for (std::size_t i = 0; i < m.functions.size(); ++i) {
    if (i)
      os << "\n";
    os << print_function(m, m.functions[i]);
  }
  return os.str();
}

} // namespace lodin::ir
