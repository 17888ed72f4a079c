#include "lodin/smt.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace lodin::smt {

namespace {

std::uint64_t mask(unsigned w) { return w >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << w) - 1; }

std::int64_t to_signed(std::uint64_t v, unsigned w) {
  if (w >= 64)
    return static_cast<std::int64_t>(v);
  const std::uint64_t m = std::uint64_t{1} << (w - 1);
  return static_cast<std::int64_t>(((v & mask(w)) ^ m) - m);
}

bool is_bvop(Op op) { return op >= Op::BvAnd && op <= Op::Srem; }
bool is_cmp(Op op) { return op >= Op::Ult && op <= Op::Sge; }

/// SMT-LIB semantics, including division by zero and oversized shifts.
std::uint64_t eval_bvop(Op op, unsigned w, std::uint64_t a, std::uint64_t b) {
  const std::uint64_t m = mask(w);
  a &= m;
  b &= m;
  const bool neg_a = to_signed(a, w) < 0;
  const bool neg_b = to_signed(b, w) < 0;
  switch (op) {
  case Op::BvAnd:
    return a & b;
  case Op::BvOr:
    return a | b;
  case Op::BvXor:
    return a ^ b;
  case Op::Shl:
    return b >= w ? 0 : (a << b) & m;
  case Op::Lshr:
    return b >= w ? 0 : a >> b;
  case Op::Ashr:
    if (b >= w)
      return neg_a ? m : 0;
    return static_cast<std::uint64_t>(to_signed(a, w) >> b) & m;
  case Op::Add:
    return (a + b) & m;
  case Op::Sub:
    return (a - b) & m;
  case Op::Mul:
    return (a * b) & m;
  case Op::Udiv:
    return b == 0 ? m : a / b;
  case Op::Urem:
    return b == 0 ? a : a % b;
  case Op::Sdiv:
  case Op::Srem: {
    // defined through the unsigned operations on magnitudes
    const std::uint64_t ma = neg_a ? (0 - a) & m : a;
    const std::uint64_t mb = neg_b ? (0 - b) & m : b;
    if (op == Op::Sdiv) {
      const std::uint64_t q = mb == 0 ? m : ma / mb;
      return neg_a != neg_b ? (0 - q) & m : q;
    }
    const std::uint64_t r = mb == 0 ? ma : ma % mb;
    return neg_a ? (0 - r) & m : r;
  }
  default:
    break;
  }
  throw SortError(std::string("not a bitvector operation: ") + op_name(op));
}

bool eval_cmp(Op op, unsigned w, std::uint64_t a, std::uint64_t b) {
  const auto sa = to_signed(a, w), sb = to_signed(b, w);
  switch (op) {
  case Op::Ult:
    return a < b;
  case Op::Ule:
    return a <= b;
  case Op::Ugt:
    return a > b;
  case Op::Uge:
    return a >= b;
  case Op::Slt:
    return sa < sb;
  case Op::Sle:
    return sa <= sb;
  case Op::Sgt:
    return sa > sb;
  case Op::Sge:
    return sa >= sb;
  default:
    break;
  }
  throw SortError(std::string("not a comparison: ") + op_name(op));
}

Expr make(Op op, Sort s, std::vector<Expr> args, std::uint64_t value = 0, unsigned lo = 0) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->sort = s;
  n->args = std::move(args);
  n->value = value;
  n->lo = lo;
  return n;
}

void need(bool ok, const std::string& what) {
  if (!ok)
    throw SortError(what);
}

void need_bv(const Expr& e, const char* ctx) {
  need(e->sort.is_bv(), std::string(ctx) + ": expected a bitvector, got " + e->sort.str());
}

} // namespace

std::string Sort::str() const {
  switch (kind) {
  case Bool:
    return "Bool";
  case BV:
    return "(_ BitVec " + std::to_string(width) + ")";
  case Array:
    return "(Array (_ BitVec 64) (_ BitVec 8))";
  }
  return "?";
}

const char* op_name(Op op) {
  switch (op) {
  case Op::Var:
    return "var";
  case Op::BvConst:
  case Op::BoolConst:
    return "const";
  case Op::ConstArray:
    return "const-array";
  case Op::Not:
    return "not";
  case Op::And:
    return "and";
  case Op::Or:
    return "or";
  case Op::Ite:
    return "ite";
  case Op::Eq:
    return "=";
  case Op::BvAnd:
    return "bvand";
  case Op::BvOr:
    return "bvor";
  case Op::BvXor:
    return "bvxor";
  case Op::Shl:
    return "bvshl";
  case Op::Lshr:
    return "bvlshr";
  case Op::Ashr:
    return "bvashr";
  case Op::Add:
    return "bvadd";
  case Op::Sub:
    return "bvsub";
  case Op::Mul:
    return "bvmul";
  case Op::Udiv:
    return "bvudiv";
  case Op::Sdiv:
    return "bvsdiv";
  case Op::Urem:
    return "bvurem";
  case Op::Srem:
    return "bvsrem";
  case Op::Ult:
    return "bvult";
  case Op::Ule:
    return "bvule";
  case Op::Ugt:
    return "bvugt";
  case Op::Uge:
    return "bvuge";
  case Op::Slt:
    return "bvslt";
  case Op::Sle:
    return "bvsle";
  case Op::Sgt:
    return "bvsgt";
  case Op::Sge:
    return "bvsge";
  case Op::Concat:
    return "concat";
  case Op::Extract:
    return "extract";
  case Op::ZeroExt:
    return "zero_extend";
  case Op::SignExt:
    return "sign_extend";
  case Op::Select:
    return "select";
  case Op::Store:
    return "store";
  }
  return "?";
}

Expr var(const std::string& name, Sort s) {
  need(!name.empty(), "variable without a name");
  need(!s.is_bv() || (s.width >= 1 && s.width <= 64), "bitvector width out of range");
  auto n = std::make_shared<Node>();
  n->op = Op::Var;
  n->sort = s;
  n->name = name;
  return n;
}

Expr bv(unsigned width, std::uint64_t value) {
  need(width >= 1 && width <= 64, "bitvector width out of range");
  return make(Op::BvConst, Sort::bv(width), {}, value & mask(width));
}

Expr bv(const BitVec& v) { return bv(v.width, v.bits); }

Expr boolean(bool b) {
  static const Expr t = make(Op::BoolConst, Sort::boolean(), {}, 1);
  static const Expr f = make(Op::BoolConst, Sort::boolean(), {}, 0);
  return b ? t : f;
}

Expr const_array(std::uint8_t byte) { return make(Op::ConstArray, Sort::array(), {}, byte); }

Expr mk_not(const Expr& a) {
  need(a->sort.is_bool(), "not: expected Bool");
  if (a->op == Op::BoolConst)
    return boolean(!a->value);
  if (a->op == Op::Not)
    return a->args[0];
  return make(Op::Not, Sort::boolean(), {a});
}

namespace {

Expr junction(Op op, std::vector<Expr> args) {
  const bool unit = op == Op::And; // neutral element
  std::vector<Expr> keep;
  for (auto& a : args) {
    need(a->sort.is_bool(), std::string(op_name(op)) + ": expected Bool");
    if (a->op == Op::BoolConst) {
      if (static_cast<bool>(a->value) != unit)
        return boolean(!unit);
      continue;
    }
    if (a->op == op) {
      keep.insert(keep.end(), a->args.begin(), a->args.end());
      continue;
    }
    keep.push_back(std::move(a));
  }
  if (keep.empty())
    return boolean(unit);
  if (keep.size() == 1)
    return keep[0];
  return make(op, Sort::boolean(), std::move(keep));
}

} // namespace

Expr mk_and(std::vector<Expr> args) { return junction(Op::And, std::move(args)); }
Expr mk_or(std::vector<Expr> args) { return junction(Op::Or, std::move(args)); }

Expr ite(const Expr& c, const Expr& a, const Expr& b) {
  need(c->sort.is_bool(), "ite: condition must be Bool");
  need(a->sort == b->sort, "ite: branch sorts differ");
  if (c->op == Op::BoolConst)
    return c->value ? a : b;
  if (a == b)
    return a;
  if (is_const(a) && is_const(b) && a->value == b->value)
    return a;
  return make(Op::Ite, a->sort, {c, a, b});
}

Expr eq(const Expr& a, const Expr& b) {
  need(a->sort == b->sort, "=: sorts differ (" + a->sort.str() + ", " + b->sort.str() + ")");
  if (a == b)
    return boolean(true);
  if (is_const(a) && is_const(b))
    return boolean(a->value == b->value);
  return make(Op::Eq, Sort::boolean(), {a, b});
}

Expr neq(const Expr& a, const Expr& b) { return mk_not(eq(a, b)); }

Expr apply(Op op, const Expr& a, const Expr& b) {
  need_bv(a, op_name(op));
  need_bv(b, op_name(op));
  need(a->sort == b->sort, std::string(op_name(op)) + ": widths differ (" +
                               std::to_string(a->sort.width) + ", " +
                               std::to_string(b->sort.width) + ")");
  const unsigned w = a->sort.width;
  if (is_cmp(op)) {
    if (is_const(a) && is_const(b))
      return boolean(eval_cmp(op, w, a->value, b->value));
    return make(op, Sort::boolean(), {a, b});
  }
  need(is_bvop(op), std::string("not a binary bitvector operation: ") + op_name(op));
  if (is_const(a) && is_const(b))
    return bv(w, eval_bvop(op, w, a->value, b->value));
  const bool a0 = is_const(a) && a->value == 0, b0 = is_const(b) && b->value == 0;
  switch (op) {
  case Op::Add:
  case Op::BvOr:
  case Op::BvXor:
    if (a0)
      return b;
    if (b0)
      return a;
    break;
  case Op::Sub:
  case Op::Shl:
  case Op::Lshr:
  case Op::Ashr:
    if (b0)
      return a;
    break;
  case Op::Mul:
  case Op::BvAnd:
    if (a0)
      return a;
    if (b0)
      return b;
    break;
  default:
    break;
  }
  if ((op == Op::BvXor || op == Op::Sub) && a == b)
    return bv(w, 0);
  return make(op, a->sort, {a, b});
}

Expr concat(const Expr& hi, const Expr& lo) {
  need_bv(hi, "concat");
  need_bv(lo, "concat");
  const unsigned w = hi->sort.width + lo->sort.width;
  need(w <= 64, "concat wider than 64 bits");
  if (is_const(hi) && is_const(lo))
    return bv(w, (hi->value << lo->sort.width) | lo->value);
  // re-joining adjacent slices of one term
  if (hi->op == Op::Extract && lo->op == Op::Extract && hi->args[0] == lo->args[0] &&
      hi->lo == lo->lo + lo->sort.width)
    return extract(hi->args[0], lo->lo, w);
  return make(Op::Concat, Sort::bv(w), {hi, lo});
}

Expr extract(const Expr& a, unsigned lo, unsigned width) {
  need_bv(a, "extract");
  need(width >= 1 && lo + width <= a->sort.width, "extract out of range");
  if (lo == 0 && width == a->sort.width)
    return a;
  if (is_const(a))
    return bv(width, a->value >> lo);
  if (a->op == Op::Extract)
    return extract(a->args[0], a->lo + lo, width);
  if (a->op == Op::Concat) {
    const unsigned lw = a->args[1]->sort.width;
    if (lo + width <= lw)
      return extract(a->args[1], lo, width);
    if (lo >= lw)
      return extract(a->args[0], lo - lw, width);
  }
  if ((a->op == Op::ZeroExt || a->op == Op::SignExt) && lo + width <= a->args[0]->sort.width)
    return extract(a->args[0], lo, width);
  return make(Op::Extract, Sort::bv(width), {a}, 0, lo);
}

Expr zext(const Expr& a, unsigned width) {
  need_bv(a, "zero_extend");
  need(width >= a->sort.width && width <= 64, "zero_extend to a narrower width");
  if (width == a->sort.width)
    return a;
  if (is_const(a))
    return bv(width, a->value);
  return make(Op::ZeroExt, Sort::bv(width), {a});
}

Expr sext(const Expr& a, unsigned width) {
  need_bv(a, "sign_extend");
  need(width >= a->sort.width && width <= 64, "sign_extend to a narrower width");
  if (width == a->sort.width)
    return a;
  if (is_const(a))
    return bv(width, static_cast<std::uint64_t>(to_signed(a->value, a->sort.width)));
  return make(Op::SignExt, Sort::bv(width), {a});
}

Expr select(const Expr& arr, const Expr& idx) {
  need(arr->sort.is_array(), "select: expected an array");
  need(idx->sort == Sort::bv(64), "select: index must be 64 bits");
  // look through stores at known-distinct constant indices
  Expr a = arr;
  while (a->op == Op::Store) {
    const auto& i = a->args[1];
    if (i == idx || (is_const(i) && is_const(idx) && i->value == idx->value))
      return a->args[2];
    if (!(is_const(i) && is_const(idx)))
      break;
    a = a->args[0];
  }
  if (a->op == Op::ConstArray)
    return bv(8, a->value);
  return make(Op::Select, Sort::bv(8), {a, idx});
}

Expr store(const Expr& arr, const Expr& idx, const Expr& val) {
  need(arr->sort.is_array(), "store: expected an array");
  need(idx->sort == Sort::bv(64), "store: index must be 64 bits");
  need(val->sort == Sort::bv(8), "store: value must be 8 bits");
  return make(Op::Store, Sort::array(), {arr, idx, val});
}

Op from_opcode(ir::Opcode op) {
  using ir::Opcode;
  switch (op) {
  case Opcode::And:
    return Op::BvAnd;
  case Opcode::Or:
    return Op::BvOr;
  case Opcode::Xor:
    return Op::BvXor;
  case Opcode::Shl:
    return Op::Shl;
  case Opcode::LShr:
    return Op::Lshr;
  case Opcode::AShr:
    return Op::Ashr;
  case Opcode::Add:
    return Op::Add;
  case Opcode::Sub:
    return Op::Sub;
  case Opcode::Mul:
    return Op::Mul;
  case Opcode::UDiv:
    return Op::Udiv;
  case Opcode::SDiv:
    return Op::Sdiv;
  case Opcode::URem:
    return Op::Urem;
  case Opcode::SRem:
    return Op::Srem;
  default:
    break;
  }
  throw SortError(std::string("no SMT operation for ") + ir::opcode_name(op));
}

Op from_pred(ir::CmpPred p) {
  using ir::CmpPred;
  switch (p) {
  case CmpPred::Eq:
  case CmpPred::Ne:
    break;
  case CmpPred::Ult:
    return Op::Ult;
  case CmpPred::Ule:
    return Op::Ule;
  case CmpPred::Ugt:
    return Op::Ugt;
  case CmpPred::Uge:
    return Op::Uge;
  case CmpPred::Slt:
    return Op::Slt;
  case CmpPred::Sle:
    return Op::Sle;
  case CmpPred::Sgt:
    return Op::Sgt;
  case CmpPred::Sge:
    return Op::Sge;
  }
  throw SortError("eq/ne have no single ordering operator");
}

Expr icmp(ir::CmpPred p, const Expr& a, const Expr& b) {
  if (p == ir::CmpPred::Eq)
    return eq(a, b);
  if (p == ir::CmpPred::Ne)
    return neq(a, b);
  return apply(from_pred(p), a, b);
}

void collect_vars(const Expr& e, std::map<std::string, Sort>& out) {
  std::unordered_set<const Node*> seen;
  std::vector<const Node*> work{e.get()};
  while (!work.empty()) {
    const Node* n = work.back();
    work.pop_back();
    if (!seen.insert(n).second)
      continue;
    if (n->op == Op::Var) {
      auto [it, fresh] = out.emplace(n->name, n->sort);
      if (!fresh && !(it->second == n->sort))
        throw SortError("variable " + n->name + " used with two sorts");
    }
    for (const auto& a : n->args)
      work.push_back(a.get());
  }
}

namespace {

std::string literal(const Node& n) {
  if (n.op == Op::BoolConst)
    return n.value ? "true" : "false";
  if (n.op == Op::ConstArray) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#x%02x", static_cast<unsigned>(n.value));
    return "((as const " + n.sort.str() + ") " + buf + ")";
  }
  const unsigned w = n.sort.width;
  std::string s;
  if (w % 4 == 0) {
    static const char* hex = "0123456789abcdef";
    s = "#x";
    for (int k = static_cast<int>(w / 4) - 1; k >= 0; --k)
      s += hex[(n.value >> (4 * k)) & 0xf];
  } else {
    s = "#b";
    for (int k = static_cast<int>(w) - 1; k >= 0; --k)
      s += ((n.value >> k) & 1) ? '1' : '0';
  }
  return s;
}

std::string head(const Node& n) {
  switch (n.op) {
  case Op::Extract:
    return "(_ extract " + std::to_string(n.lo + n.sort.width - 1) + " " + std::to_string(n.lo) + ")";
  case Op::ZeroExt:
    return "(_ zero_extend " + std::to_string(n.sort.width - n.args[0]->sort.width) + ")";
  case Op::SignExt:
    return "(_ sign_extend " + std::to_string(n.sort.width - n.args[0]->sort.width) + ")";
  default:
    return op_name(n.op);
  }
}

bool is_leaf(const Node& n) { return n.args.empty(); }

/// Prints terms, naming shared inner nodes through `names`.
class Printer {
public:
  explicit Printer(const std::unordered_map<const Node*, std::string>* names) : names_(names) {}

  void print(const Node& n, std::string& out, bool top = false) const {
    if (!top && names_) {
      auto it = names_->find(&n);
      if (it != names_->end()) {
        out += it->second;
        return;
      }
    }
    if (n.op == Op::Var) {
      out += n.name;
      return;
    }
    if (is_leaf(n)) {
      out += literal(n);
      return;
    }
    out += '(';
    out += head(n);
    for (const auto& a : n.args) {
      out += ' ';
      print(*a, out);
    }
    out += ')';
  }

private:
  const std::unordered_map<const Node*, std::string>* names_;
};

} // namespace

std::string to_string(const Expr& e) {
  std::string out;
  Printer(nullptr).print(*e, out, true);
  return out;
}

std::string to_smtlib(const Expr& formula, bool want_model, unsigned timeout_ms) {
  need(formula->sort.is_bool(), "assertion must be Bool");
  // count parents per inner node, collect a post-order
  std::unordered_map<const Node*, unsigned> uses;
  std::vector<const Node*> order;
  {
    std::vector<std::pair<const Node*, bool>> work{{formula.get(), false}};
    while (!work.empty()) {
      auto [n, expanded] = work.back();
      work.pop_back();
      if (expanded) {
        order.push_back(n);
        continue;
      }
      if (uses[n]++ > 0)
        continue;
      work.push_back({n, true});
      for (auto it = n->args.rbegin(); it != n->args.rend(); ++it)
        work.push_back({it->get(), false});
    }
  }
  std::map<std::string, Sort> vars;
  collect_vars(formula, vars);

  std::string out;
  out += "(set-option :produce-models true)\n";
  if (timeout_ms)
    out += "(set-option :timeout " + std::to_string(timeout_ms) + ")\n";
  out += "(set-logic QF_ABV)\n";
  for (const auto& [name, sort] : vars)
    out += "(declare-fun " + name + " () " + sort.str() + ")\n";
  std::unordered_map<const Node*, std::string> names;
  const Printer pr(&names);
  for (const Node* n : order) {
    if (is_leaf(*n) || uses[n] < 2 || n == formula.get())
      continue;
    const std::string name = "_t" + std::to_string(names.size());
    out += "(define-fun " + name + " () " + n->sort.str() + " ";
    pr.print(*n, out, true);
    out += ")\n";
    names.emplace(n, name);
  }
  out += "(assert ";
  pr.print(*formula, out, true);
  out += ")\n(check-sat)\n";
  if (want_model)
    out += "(get-model)\n";
  return out;
}

// ---- ground evaluation

bool operator==(const ArrayValue& a, const ArrayValue& b) {
  if (a.fallback != b.fallback)
    return false;
  for (const auto& [k, v] : a.entries)
    if (b.at(k) != v)
      return false;
  for (const auto& [k, v] : b.entries)
    if (a.at(k) != v)
      return false;
  return true;
}

namespace {

struct GroundValue {
  GroundValue(std::uint64_t b = 0, std::shared_ptr<const ArrayValue> a = nullptr)
      : bits(b), array(std::move(a)) {}
  std::uint64_t bits;
  std::shared_ptr<const ArrayValue> array;
};

/// Inner nodes with more than one parent; only these are worth memoizing.
std::unordered_set<const Node*> shared_nodes(const Node& root) {
  std::unordered_set<const Node*> seen, shared;
  std::vector<const Node*> work{&root};
  while (!work.empty()) {
    const Node* n = work.back();
    work.pop_back();
    if (n->args.empty())
      continue;
    if (!seen.insert(n).second) {
      shared.insert(n);
      continue;
    }
    for (const auto& a : n->args)
      work.push_back(a.get());
  }
  return shared;
}

class Evaluator {
public:
  Evaluator(const Assignment& a, const std::unordered_set<const Node*>& shared)
      : a_(a), shared_(shared) {}

  GroundValue eval(const Node& n) {
    if (!shared_.count(&n))
      return compute(n);
    auto it = memo_.find(&n);
    if (it != memo_.end())
      return it->second;
    GroundValue v = compute(n);
    memo_.emplace(&n, v);
    return v;
  }

private:
  std::uint64_t scalar(const Node& n) { return eval(n).bits; }

  GroundValue compute(const Node& n) {
    const unsigned w = n.sort.width;
    switch (n.op) {
    case Op::Var: {
      if (n.sort.is_array()) {
        auto it = a_.arrays.find(n.name);
        if (it == a_.arrays.end())
          throw EvalError("no value for array " + n.name);
        return {0, std::make_shared<ArrayValue>(it->second)};
      }
      auto it = a_.scalars.find(n.name);
      if (it == a_.scalars.end())
        throw EvalError("no value for " + n.name);
      return {n.sort.is_bv() ? it->second & mask(w) : (it->second != 0)};
    }
    case Op::BvConst:
    case Op::BoolConst:
      return {n.value};
    case Op::ConstArray: {
      auto arr = std::make_shared<ArrayValue>();
      arr->fallback = static_cast<std::uint8_t>(n.value);
      return {0, arr};
    }
    case Op::Not:
      return {!scalar(*n.args[0])};
    case Op::And:
      for (const auto& a : n.args)
        if (!scalar(*a))
          return {0};
      return {1};
    case Op::Or:
      for (const auto& a : n.args)
        if (scalar(*a))
          return {1};
      return {0};
    case Op::Ite:
      return scalar(*n.args[0]) ? eval(*n.args[1]) : eval(*n.args[2]);
    case Op::Eq: {
      const auto x = eval(*n.args[0]), y = eval(*n.args[1]);
      if (n.args[0]->sort.is_array())
        return {*x.array == *y.array};
      return {x.bits == y.bits};
    }
    case Op::Concat:
      return {(scalar(*n.args[0]) << n.args[1]->sort.width) | scalar(*n.args[1])};
    case Op::Extract:
      return {(scalar(*n.args[0]) >> n.lo) & mask(w)};
    case Op::ZeroExt:
      return {scalar(*n.args[0])};
    case Op::SignExt:
      return {static_cast<std::uint64_t>(to_signed(scalar(*n.args[0]), n.args[0]->sort.width)) &
              mask(w)};
    case Op::Select:
      return {eval(*n.args[0]).array->at(scalar(*n.args[1]))};
    case Op::Store: {
      auto arr = std::make_shared<ArrayValue>(*eval(*n.args[0]).array);
      arr->entries[scalar(*n.args[1])] = static_cast<std::uint8_t>(scalar(*n.args[2]));
      return {0, arr};
    }
    default:
      break;
    }
    const auto x = scalar(*n.args[0]), y = scalar(*n.args[1]);
    if (is_cmp(n.op))
      return {eval_cmp(n.op, n.args[0]->sort.width, x, y)};
    return {eval_bvop(n.op, w, x, y)};
  }

  const Assignment& a_;
  const std::unordered_set<const Node*>& shared_;
  std::unordered_map<const Node*, GroundValue> memo_;
};

} // namespace

bool mini_eval(const Expr& formula, const Assignment& a) {
  need(formula->sort.is_bool(), "mini_eval: formula must be Bool");
  return Evaluator(a, shared_nodes(*formula)).eval(*formula).bits != 0;
}

std::optional<Assignment> mini_sat(const Expr& formula) {
  std::map<std::string, Sort> vars;
  collect_vars(formula, vars);
  std::vector<std::pair<std::string, std::uint64_t>> dims;
  std::uint64_t total = 1;
  for (const auto& [name, s] : vars) {
    if (s.is_array() || (s.is_bv() && s.width > 8))
      throw EvalError("mini_sat: variable " + name + " of sort " + s.str() + " is too large");
    const std::uint64_t n = s.is_bool() ? 2 : std::uint64_t{1} << s.width;
    total *= n;
    if (total > (std::uint64_t{1} << 24))
      throw EvalError("mini_sat: more than 2^24 assignments");
    dims.emplace_back(name, n);
  }
  need(formula->sort.is_bool(), "mini_sat: formula must be Bool");
  const auto shared = shared_nodes(*formula);
  Assignment a;
  for (std::uint64_t k = 0; k < total; ++k) {
    std::uint64_t rest = k;
    for (const auto& [name, n] : dims) {
      a.scalars[name] = rest % n;
      rest /= n;
    }
    if (Evaluator(a, shared).eval(*formula).bits != 0)
      return a;
  }
  return std::nullopt;
}

} // namespace lodin::smt
