#include "lodin/props.hpp"

#include <cctype>
#include <cstdlib>
#include <map>

namespace lodin::props {

std::string Comparand::str() const {
  const std::string t = ";" + type.str();
  if (is_register)
    return "@" + std::to_string(proc) + "." + func + "." + reg + t;
  if (type.is_signed) {
    const auto v = type.bits >= 64 ? static_cast<std::int64_t>(number)
                                   : static_cast<std::int64_t>(number << (64 - type.bits)) >> (64 - type.bits);
    return std::to_string(v) + t;
  }
  return std::to_string(number) + t;
}

namespace {

const char* op_text(CmpOp op) {
  switch (op) {
  case CmpOp::Eq:
    return "==";
  case CmpOp::Ne:
    return "!=";
  case CmpOp::Lt:
    return "<";
  case CmpOp::Le:
    return "<=";
  case CmpOp::Gt:
    return ">";
  case CmpOp::Ge:
    return ">=";
  }
  return "?";
}

} // namespace

std::string Prop::str() const {
  switch (kind) {
  case Kind::True:
    return "true";
  case Kind::False:
    return "false";
  case Kind::Compare:
    return "(" + lhs.str() + " " + op_text(op) + " " + rhs.str() + ")";
  case Kind::DataRace:
    return "DataRace";
  case Kind::DivZero:
    return "DivZero";
  case Kind::Overflows:
    return "Overflows";
  case Kind::CallSite:
    return "[" + std::to_string(proc) + "." + func + "]";
  case Kind::And:
    return "(" + a->str() + " && " + b->str() + ")";
  case Kind::Or:
    return "(" + a->str() + " || " + b->str() + ")";
  case Kind::Not:
    return "!" + a->str();
  }
  return "?";
}

PropPtr make_atom(Prop::Kind k) {
  auto p = std::make_shared<Prop>();
  p->kind = k;
  return p;
}
PropPtr make_true() { return make_atom(Prop::Kind::True); }
PropPtr make_not(PropPtr x) {
  auto p = std::make_shared<Prop>();
  p->kind = Prop::Kind::Not;
  p->a = std::move(x);
  return p;
}
PropPtr make_and(PropPtr x, PropPtr y) {
  auto p = std::make_shared<Prop>();
  p->kind = Prop::Kind::And;
  p->a = std::move(x);
  p->b = std::move(y);
  return p;
}
PropPtr make_or(PropPtr x, PropPtr y) {
  auto p = std::make_shared<Prop>();
  p->kind = Prop::Kind::Or;
  p->a = std::move(x);
  p->b = std::move(y);
  return p;
}
PropPtr make_callsite(int proc, std::string func) {
  auto p = std::make_shared<Prop>();
  p->kind = Prop::Kind::CallSite;
  p->proc = proc;
  p->func = std::move(func);
  return p;
}
PropPtr make_compare(Comparand l, CmpOp op, Comparand r) {
  if (!(l.type == r.type))
    throw std::invalid_argument("comparison between " + l.type.str() + " and " + r.type.str());
  auto p = std::make_shared<Prop>();
  p->kind = Prop::Kind::Compare;
  p->lhs = std::move(l);
  p->op = op;
  p->rhs = std::move(r);
  return p;
}

bool callsite_only(const Prop& p) {
  switch (p.kind) {
  case Prop::Kind::CallSite:
  case Prop::Kind::True:
  case Prop::Kind::False:
    return true;
  case Prop::Kind::And:
  case Prop::Kind::Or:
    return callsite_only(*p.a) && callsite_only(*p.b);
  case Prop::Kind::Not:
    return callsite_only(*p.a);
  default:
    return false;
  }
}

namespace {

class Scanner {
public:
  explicit Scanner(std::string_view s) : s_(s) {}

  void ws() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_])))
      ++i_;
  }
  bool done() {
    ws();
    return i_ >= s_.size();
  }
  char peek() {
    ws();
    return i_ < s_.size() ? s_[i_] : '\0';
  }
  bool lit(std::string_view t) {
    ws();
    if (s_.substr(i_, t.size()) == t) {
      i_ += t.size();
      return true;
    }
    return false;
  }
  /// Keyword followed by a non-identifier character.
  bool word(std::string_view t) {
    ws();
    if (s_.substr(i_, t.size()) != t)
      return false;
    const auto j = i_ + t.size();
    if (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '_'))
      return false;
    i_ = j;
    return true;
  }
  void expect(std::string_view t) {
    if (!lit(t))
      fail("expected '" + std::string(t) + "'");
  }
  [[noreturn]] void fail(const std::string& msg) const { throw QueryParseError(i_ + 1, msg); }
  std::string ident() {
    ws();
    const auto st = i_;
    while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_' ||
                              s_[i_] == '.' || s_[i_] == '$' || s_[i_] == '-'))
      ++i_;
    if (st == i_)
      fail("expected a name");
    return std::string(s_.substr(st, i_ - st));
  }
  /// Function names may contain dots, so stop at the last dot before '%'.
  std::string func_name() {
    ws();
    const auto st = i_;
    const auto pct = s_.find('%', i_);
    if (pct == std::string_view::npos || pct == st)
      fail("malformed register path, expected @proc.func.%reg");
    if (s_[pct - 1] != '.')
      fail("malformed register path, expected '.' before '%'");
    const auto name = s_.substr(st, pct - 1 - st);
    if (name.empty())
      fail("malformed register path, missing function name");
    for (char c : name)
      if (std::isspace(static_cast<unsigned char>(c)) || c == ')' || c == '(')
        fail("malformed register path");
    i_ = pct;
    return std::string(name);
  }
  std::int64_t integer() {
    ws();
    const auto st = i_;
    if (i_ < s_.size() && (s_[i_] == '-' || s_[i_] == '+'))
      ++i_;
    while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_])))
      ++i_;
    if (i_ == st || (i_ == st + 1 && !std::isdigit(static_cast<unsigned char>(s_[st]))))
      fail("expected an integer");
    try {
      return std::stoll(std::string(s_.substr(st, i_ - st)));
    } catch (const std::exception&) {
      fail("integer out of range");
    }
  }
  std::uint64_t unsigned_int() {
    const auto v = integer();
    if (v < 0)
      fail("expected a non-negative integer");
    return static_cast<std::uint64_t>(v);
  }
  double number() {
    ws();
    char* end = nullptr;
    const std::string tmp(s_.substr(i_));
    const double v = std::strtod(tmp.c_str(), &end);
    if (end == tmp.c_str())
      fail("expected a number");
    i_ += static_cast<std::size_t>(end - tmp.c_str());
    return v;
  }
  bool digit_next() {
    const char c = peek();
    return std::isdigit(static_cast<unsigned char>(c)) || c == '-';
  }

private:
  std::string_view s_;
  std::size_t i_ = 0;
};

class PropParser {
public:
  explicit PropParser(Scanner& sc) : sc_(sc) {}

  PropPtr disj() {
    auto l = conj();
    while (sc_.lit("||"))
      l = make_or(l, conj());
    return l;
  }

private:
  PropPtr conj() {
    auto l = unary();
    while (sc_.lit("&&"))
      l = make_and(l, unary());
    return l;
  }

  PropPtr unary() {
    if (sc_.lit("!"))
      return make_not(unary());
    return primary();
  }

  bool comparand_next() { return sc_.peek() == '@' || sc_.digit_next(); }

  QueryType qtype() {
    QueryType t;
    if (sc_.lit("ui"))
      t.is_signed = false;
    else if (sc_.lit("si"))
      t.is_signed = true;
    else
      sc_.fail("expected a query type such as ui32 or si8");
    const auto bits = sc_.unsigned_int();
    if (bits != 8 && bits != 16 && bits != 32 && bits != 64)
      sc_.fail("query types are 8, 16, 32 or 64 bits wide");
    t.bits = static_cast<unsigned>(bits);
    return t;
  }

  Comparand comparand() {
    Comparand c;
    if (sc_.lit("@")) {
      c.is_register = true;
      const auto proc = sc_.integer();
      if (proc < 0)
        sc_.fail("process index must be non-negative");
      c.proc = static_cast<int>(proc);
      sc_.expect(".");
      c.func = sc_.func_name();
      sc_.expect("%");
      c.reg = "%" + sc_.ident();
      sc_.expect(";");
      c.type = qtype();
      return c;
    }
    const auto v = sc_.integer();
    sc_.expect(";");
    c.type = qtype();
    c.number = ir::truncate(static_cast<std::uint64_t>(v), c.type.bits);
    return c;
  }

  CmpOp cmp_op() {
    if (sc_.lit("=="))
      return CmpOp::Eq;
    if (sc_.lit("!="))
      return CmpOp::Ne;
    if (sc_.lit("<="))
      return CmpOp::Le;
    if (sc_.lit(">="))
      return CmpOp::Ge;
    if (sc_.lit("<"))
      return CmpOp::Lt;
    if (sc_.lit(">"))
      return CmpOp::Gt;
    sc_.fail("expected a comparison operator");
  }

  PropPtr compare() {
    auto l = comparand();
    const auto op = cmp_op();
    auto r = comparand();
    if (!(l.type == r.type))
      sc_.fail("type mismatch: " + l.type.str() + " vs " + r.type.str());
    return make_compare(std::move(l), op, std::move(r));
  }

  PropPtr primary() {
    if (sc_.lit("(")) {
      PropPtr p = comparand_next() ? compare() : disj();
      sc_.expect(")");
      return p;
    }
    if (comparand_next())
      return compare();
    if (sc_.lit("[")) {
      const auto proc = sc_.integer();
      if (proc < 0)
        sc_.fail("process index must be non-negative");
      sc_.expect(".");
      std::string f = sc_.ident();
      if (!f.empty() && f[0] == '@')
        f = f.substr(1);
      sc_.expect("]");
      return make_callsite(static_cast<int>(proc), f);
    }
    if (sc_.word("DataRace"))
      return make_atom(Prop::Kind::DataRace);
    if (sc_.word("DivZero"))
      return make_atom(Prop::Kind::DivZero);
    if (sc_.word("Overflows"))
      return make_atom(Prop::Kind::Overflows);
    if (sc_.word("true"))
      return make_atom(Prop::Kind::True);
    if (sc_.word("false"))
      return make_atom(Prop::Kind::False);
    sc_.fail("expected a proposition");
  }

  Scanner& sc_;
};

void suffix(Scanner& sc, Query& q, std::initializer_list<const char*> keys) {
  if (!sc.lit("{"))
    return;
  if (sc.lit("}"))
    return;
  do {
    const auto key = sc.ident();
    bool known = false;
    for (auto k : keys)
      known = known || key == k;
    if (!known)
      sc.fail("unknown option '" + key + "'");
    sc.expect("=");
    const double v = sc.number();
    if (key == "Alpha")
      q.alpha = v;
    else if (key == "Epsilon")
      q.epsilon = v;
    else if (key == "Beta")
      q.beta = v;
    else if (key == "Delta")
      q.delta = v;
  } while (sc.lit(","));
  sc.expect("}");
}

} // namespace

PropPtr parse_prop(std::string_view text) {
  Scanner sc(text);
  PropParser pp(sc);
  auto p = pp.disj();
  if (!sc.done())
    sc.fail("unexpected trailing input");
  return p;
}

Query parse_query(std::string_view text) {
  Scanner sc(text);
  Query q;
  q.text = std::string(text);
  while (!q.text.empty() && std::isspace(static_cast<unsigned char>(q.text.back())))
    q.text.pop_back();
  while (!q.text.empty() && std::isspace(static_cast<unsigned char>(q.text.front())))
    q.text.erase(q.text.begin());
  if (sc.word("EnumStatesSMC")) {
    q.kind = Query::Kind::EnumStatesSMC;
    sc.expect("<=");
    q.step_bound = sc.unsigned_int();
    q.runs = sc.unsigned_int();
    if (q.step_bound < 1 || q.runs < 1)
      sc.fail("step bound and run count must be positive");
  } else if (sc.word("EnumStates")) {
    q.kind = Query::Kind::EnumStates;
  } else if (sc.lit("E<>")) {
    q.kind = Query::Kind::EReach;
    PropParser pp(sc);
    q.prop = pp.disj();
  } else if (sc.lit("Pr")) {
    sc.expect("[");
    sc.expect("<=");
    q.step_bound = sc.unsigned_int();
    if (q.step_bound < 1)
      sc.fail("step bound must be at least 1");
    sc.expect("]");
    sc.expect("(");
    sc.expect("<>");
    PropParser pp(sc);
    q.prop = pp.disj();
    sc.expect(")");
    if (sc.lit(">=")) {
      q.kind = Query::Kind::PrTest;
      q.theta = sc.number();
      suffix(sc, q, {"Alpha", "Beta", "Delta"});
      if (!(q.theta - q.delta > 0.0 && q.theta + q.delta < 1.0))
        sc.fail("theta +- delta must lie strictly inside (0, 1)");
      if (!(q.alpha > 0 && q.alpha < 1 && q.beta > 0 && q.beta < 1))
        sc.fail("Alpha and Beta must lie in (0, 1)");
    } else {
      q.kind = Query::Kind::PrEstimate;
      suffix(sc, q, {"Alpha", "Epsilon"});
      if (!(q.alpha > 0 && q.alpha < 1 && q.epsilon > 0 && q.epsilon < 1))
        sc.fail("Alpha and Epsilon must lie in (0, 1)");
    }
  } else {
    sc.fail("expected E<>, Pr, EnumStates or EnumStatesSMC");
  }
  if (!sc.done())
    sc.fail("unexpected trailing input");
  return q;
}

} // namespace lodin::props
