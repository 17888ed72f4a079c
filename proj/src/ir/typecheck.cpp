#include "lodin/typecheck.hpp"

#include "lodin/printer.hpp"

#include <set>

namespace lodin::ir {

std::string TypeCheckError::str() const {
  std::string s = std::to_string(pos.line) + ":" + std::to_string(pos.col) + ": error: ";
  s += "[" + rule + "] @" + function;
  if (!block.empty())
    s += " %" + block;
  return s + ": " + message;
}

namespace {

class Checker {
public:
  Checker(const Module& m, std::vector<TypeCheckError>& out) : m_(m), out_(out) {}

  void function(const Func& f) {
    f_ = &f;
    block_.clear();
    if (f.is_declaration)
      return;
    if (f.blocks.empty()) {
      report(-1, "Function", "function has no blocks", f.pos);
      return;
    }
    std::vector<int> defs(f.regs.size(), 0);
    for (auto p : f.params)
      ++defs[static_cast<std::size_t>(p)];
    for (const auto& b : f.blocks) {
      block_ = b.label;
      check_block(b);
      for (std::size_t i = 0; i < b.instrs.size(); ++i) {
        const auto& in = b.instrs[i];
        if (in.result >= 0)
          ++defs[static_cast<std::size_t>(in.result)];
        instr(static_cast<int>(i), in);
      }
    }
    block_.clear();
    for (std::size_t r = 0; r < f.regs.size(); ++r) {
      const auto& ri = f.regs[r];
      if (ri.kind == RegKind::Value && defs[r] != 1)
        report(-1, "Function",
               "register " + ri.name + (defs[r] == 0 ? " is never defined" : " is defined more than once"),
               f.pos);
      if (ri.kind == RegKind::ConstExpr)
        cexpr(*ri.cexpr, ri.type);
    }
  }

private:
  const Type& ty(RegIdx r) const { return f_->regs[static_cast<std::size_t>(r)].type; }

  void report(int idx, const std::string& rule, const std::string& msg, SourcePos pos) {
    out_.push_back({f_->name, block_, idx, rule, msg, pos});
  }

  static bool points_to(const Type& p, const Type& t) {
    return p.is_ptr() && (p.is_opaque() || p.pointee() == t);
  }

  void check_block(const Block& b) {
    const auto pos = b.instrs.empty() ? f_->pos : b.instrs.front().pos;
    if (b.instrs.empty()) {
      report(-1, "Block", "block is empty", pos);
      return;
    }
    if (!is_terminator(b.instrs.back().op))
      report(-1, "Block", "block does not end in a terminator", b.instrs.back().pos);
    for (std::size_t i = 0; i + 1 < b.instrs.size(); ++i)
      if (is_terminator(b.instrs[i].op))
        report(static_cast<int>(i), "Block", "terminator before the end of the block", b.instrs[i].pos);
    bool seen_other = false;
    for (std::size_t i = 0; i < b.instrs.size(); ++i) {
      if (b.instrs[i].op != Opcode::Phi)
        seen_other = true;
      else if (seen_other)
        report(static_cast<int>(i), "Block", "phi after a non-phi instruction", b.instrs[i].pos);
    }
  }

  bool label_ok(BlockIdx l) const {
    return l >= 0 && static_cast<std::size_t>(l) < f_->blocks.size();
  }

  void gep(int idx, const Instr& in, const Type& result, const char* rule) {
    if (in.ops.size() < 2) {
      report(idx, rule, "getelementptr needs a base and at least one index", in.pos);
      return;
    }
    if (!points_to(ty(in.ops[0]), in.type))
      report(idx, rule, "base " + ty(in.ops[0]).str() + " is not a pointer to " + in.type.str(), in.pos);
    if (!ty(in.ops[1]).is_int())
      report(idx, rule, "index must be an integer", in.pos);
    std::vector<std::int64_t> path;
    for (std::size_t k = 2; k < in.ops.size(); ++k) {
      const auto& ri = f_->regs[static_cast<std::size_t>(in.ops[k])];
      if (ri.kind != RegKind::Constant || !ri.type.is_int()) {
        report(idx, rule, "struct index must be an integer constant", in.pos);
        return;
      }
      path.push_back(static_cast<std::int64_t>(ri.constant));
    }
    try {
      const Type elem = project(in.type, path);
      if (!(result.is_opaque() || (result.is_ptr() && result.pointee() == elem)))
        report(idx, rule, "result " + result.str() + " should be " + elem.str() + "*", in.pos);
    } catch (const TypeError& e) {
      report(idx, rule, e.what(), in.pos);
    }
  }

  void binary(int idx, const Instr& in, const Type& result, const char* rule) {
    if (!in.type.is_int())
      report(idx, rule, "operands must be integers", in.pos);
    if (ty(in.ops[0]) != in.type || ty(in.ops[1]) != in.type || result != in.type)
      report(idx, rule,
             "operand and result types differ: " + ty(in.ops[0]).str() + ", " +
                 ty(in.ops[1]).str() + " -> " + result.str() + " under " + in.type.str(),
             in.pos);
  }

  void cexpr(const Instr& e, const Type& result) {
    if (e.op == Opcode::Gep)
      gep(-1, e, result, "GEP");
    else
      binary(-1, e, result, "Binary");
  }

  void instr(int idx, const Instr& in) {
    const Type res = in.result >= 0 ? ty(in.result) : Type::void_type();
    switch (in.op) {
    case Opcode::ICmp:
      if (!(in.type.is_int() || in.type.is_ptr()) || ty(in.ops[0]) != in.type ||
          ty(in.ops[1]) != in.type)
        report(idx, "Compare", "operands must share type " + in.type.str(), in.pos);
      if (res != Type::integer(8))
        report(idx, "Compare", "result must be i8", in.pos);
      break;
    case Opcode::Alloca:
      if (in.type.is_void() || !points_to(res, in.type))
        report(idx, "Alloca", "result must point to " + in.type.str(), in.pos);
      break;
    case Opcode::Load:
      if (!points_to(ty(in.ops[0]), in.type) || res != in.type)
        report(idx, "Load", "pointer " + ty(in.ops[0]).str() + " does not load " + in.type.str(), in.pos);
      break;
    case Opcode::Store:
      if (ty(in.ops[0]) != in.type || !points_to(ty(in.ops[1]), in.type))
        report(idx, "Store", "cannot store " + ty(in.ops[0]).str() + " through " + ty(in.ops[1]).str(), in.pos);
      break;
    case Opcode::Gep:
      gep(idx, in, res, "GEP");
      break;
    case Opcode::RetVoid:
      if (!f_->ret_type.is_void())
        report(idx, "Return", "ret void in function returning " + f_->ret_type.str(), in.pos);
      break;
    case Opcode::Ret:
      if (f_->ret_type != in.type || ty(in.ops[0]) != in.type)
        report(idx, "Return", "returns " + ty(in.ops[0]).str() + " but function returns " + f_->ret_type.str(), in.pos);
      break;
    case Opcode::Br:
      if (in.labels.size() != 1 || !label_ok(in.labels[0]))
        report(idx, "Branch", "bad branch target", in.pos);
      break;
    case Opcode::CondBr:
      if (ty(in.ops[0]) != Type::integer(8))
        report(idx, "Branch", "condition must be i8", in.pos);
      if (in.labels.size() != 2 || !label_ok(in.labels[0]) || !label_ok(in.labels[1]))
        report(idx, "Branch", "bad branch target", in.pos);
      break;
    case Opcode::Phi:
      if (in.ops.empty() || in.ops.size() != in.labels.size())
        report(idx, "Phi", "malformed incoming list", in.pos);
      for (std::size_t k = 0; k < in.ops.size(); ++k) {
        if (ty(in.ops[k]) != in.type)
          report(idx, "Phi", "incoming " + print_operand(*f_, in.ops[k]) + " is not " + in.type.str(), in.pos);
        if (k < in.labels.size() && !label_ok(in.labels[k]))
          report(idx, "Phi", "bad incoming label", in.pos);
      }
      if (res != in.type)
        report(idx, "Phi", "result type mismatch", in.pos);
      break;
    case Opcode::Call: {
      if (in.result >= 0 && res != in.type)
        report(idx, "Call", "result type mismatch", in.pos);
      const auto fi = m_.find_function(in.callee);
      if (!fi)
        break;
      const auto& callee = m_.functions[static_cast<std::size_t>(*fi)];
      if (callee.ret_type != in.type)
        report(idx, "Call", "@" + in.callee + " returns " + callee.ret_type.str(), in.pos);
      if (callee.params.size() > in.ops.size() ||
          (!callee.is_vararg && callee.params.size() != in.ops.size())) {
        report(idx, "Call", "@" + in.callee + " expects " + std::to_string(callee.params.size()) + " arguments", in.pos);
        break;
      }
      for (std::size_t k = 0; k < callee.params.size(); ++k)
        if (callee.regs[static_cast<std::size_t>(callee.params[k])].type != ty(in.ops[k]))
          report(idx, "Call", "argument " + std::to_string(k) + " has the wrong type", in.pos);
      break;
    }
    case Opcode::Nondet:
      if (!(in.type.is_int() || in.type.is_ptr()) || res != in.type)
        report(idx, "NonDet", "nondet needs an integer or pointer type", in.pos);
      break;
    default:
      binary(idx, in, res, "Binary");
      break;
    }
  }

  const Module& m_;
  std::vector<TypeCheckError>& out_;
  const Func* f_ = nullptr;
  std::string block_;
};

} // namespace

std::vector<TypeCheckError> type_check(const Module& m) {
  std::vector<TypeCheckError> out;
  Checker c(m, out);
  for (const auto& f : m.functions)
    c.function(f);
  return out;
}

} // namespace lodin::ir
