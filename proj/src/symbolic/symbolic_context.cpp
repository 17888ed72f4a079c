#include "lodin/symbolic_context.hpp"

#include "lodin/explicit_context.hpp"

#include <algorithm>

namespace lodin {

using smt::Expr;

namespace {

Expr fresh(const char* prefix, std::uint32_t& counter, smt::Sort s) {
  return smt::var(prefix + std::to_string(counter++), s);
}

void check_width(const Expr& v, unsigned w, const char* what) {
  if (!v->sort.is_bv() || v->sort.width != w)
    throw ContextError(ErrorKind::Fault, std::string(what) + ": expected a " + std::to_string(w) +
                                             "-bit value, got " + v->sort.str());
}

std::vector<Expr> facts_above(const PathNode* n, const PathNode* stop) {
  std::vector<Expr> out;
  for (; n != stop; n = n->next.get())
    out.push_back(n->fact);
  std::reverse(out.begin(), out.end());
  return out;
}

bool same_value(const Expr& a, const Expr& b) {
  return a == b || (smt::is_const(a) && smt::is_const(b) && a->sort == b->sort && a->value == b->value);
}

} // namespace

Expr SymbolicState::path_formula() const { return smt::mk_and(facts_above(path.get(), nullptr)); }

void SymbolicState::assume(const Expr& fact) {
  if (smt::is_true(fact))
    return;
  auto n = std::make_shared<PathNode>();
  n->fact = fact;
  n->size = path_size() + 1;
  n->next = path;
  path = std::move(n);
}

SymbolicState SymbolicContext::initial() const {
  State s;
  s.mem = smt::const_array(0);
  s.mem_view = s.mem;
  s.free_ptr = smt::bv(64, kHeapBase);
  return s;
}

RegVarId SymbolicContext::make_reg(State& s, const ir::Type& t) const {
  const unsigned w = value_width(t);
  RegVarId id = 0;
  while (id < s.regs.size() && s.regs[id].used)
    ++id;
  if (id == s.regs.size())
    s.regs.emplace_back();
  auto& r = s.regs[id];
  ++r.gen;
  r.used = true;
  r.set = false;
  r.width = w;
  r.var = smt::var("r" + std::to_string(id) + "_" + std::to_string(r.gen), smt::Sort::bv(w));
  r.value = r.var;
  return id;
}

void SymbolicContext::release_reg(State& s, RegVarId id) const {
  if (id >= s.regs.size() || !s.regs[id].used)
    throw ContextError(ErrorKind::Fault, "release of unallocated register " + std::to_string(id));
  auto& r = s.regs[id];
  r.used = false;
  r.set = false;
  r.var.reset();
  r.value.reset();
}

SymbolicContext::Value SymbolicContext::eval_reg(const State& s, RegVarId id,
                                                 const ir::Type& t) const {
  if (id >= s.regs.size() || !s.regs[id].used)
    throw ContextError(ErrorKind::Fault, "read of unallocated register " + std::to_string(id));
  const auto& r = s.regs[id];
  if (r.width != value_width(t))
    throw ContextError(ErrorKind::Fault, "register width mismatch");
  return r.value;
}

void SymbolicContext::set_reg(State& s, RegVarId id, const Value& v, const ir::Type& t) const {
  if (id >= s.regs.size() || !s.regs[id].used)
    throw ContextError(ErrorKind::Fault, "write of unallocated register " + std::to_string(id));
  auto& r = s.regs[id];
  check_width(v, value_width(t), "set register");
  if (r.width != v->sort.width)
    throw ContextError(ErrorKind::Fault, "register width mismatch");
  if (r.set)
    throw SsaError("register variable " + r.var->name + " assigned twice");
  r.set = true;
  s.assume(smt::eq(r.var, v));
  r.value = smt::is_const(v) ? v : r.var;
}

SymbolicContext::Value SymbolicContext::constant(const ir::Type& t, std::uint64_t k) const {
  return smt::bv(value_width(t), k);
}

SymbolicContext::Value SymbolicContext::domain_value(std::uint64_t bits, std::uint64_t k) const {
  return smt::bv(static_cast<unsigned>(bits), k);
}

SymbolicContext::Value SymbolicContext::alloc(State& s, const ir::Type& t) const {
  const Expr ptr = s.free_ptr;
  const auto stride = std::max<std::uint64_t>(ir::bsize(t), 1);
  const Expr next = smt::apply(smt::Op::Add, ptr, smt::bv(64, stride));
  const Expr fv = fresh("f", s.free_count, smt::Sort::bv(64));
  s.assume(smt::eq(fv, next));
  s.free_ptr = smt::is_const(next) ? next : fv;
  return ptr;
}

void SymbolicContext::free(State&, const Value&) const {}

SymbolicContext::Value SymbolicContext::load(const State& s, const Value& ptr,
                                             const ir::Type& t) const {
  check_width(ptr, 64, "load address");
  const unsigned n = value_width(t) / 8;
  Expr out;
  for (unsigned k = 0; k < n; ++k) {
    const Expr addr = ptr_add(ptr, k);
    Expr byte = smt::select(s.mem_view, addr);
    if (byte->op == smt::Op::Select)
      byte = smt::select(s.mem, addr); // not resolved by known stores
    out = k == 0 ? byte : smt::concat(byte, out);
  }
  return out;
}

void SymbolicContext::store(State& s, const Value& v, const Value& ptr, const ir::Type& t) const {
  check_width(ptr, 64, "store address");
  const unsigned w = value_width(t);
  check_width(v, w, "store value");
  Expr chain = s.mem, view = s.mem_view;
  for (unsigned k = 0; k < w / 8; ++k) {
    const Expr addr = ptr_add(ptr, k);
    const Expr byte = smt::extract(v, 8 * k, 8);
    chain = smt::store(chain, addr, byte);
    view = smt::store(view, addr, byte);
  }
  const Expr m = fresh("m", s.mem_count, smt::Sort::array());
  s.assume(smt::eq(m, chain));
  s.mem = m;
  s.mem_view = view;
}

void SymbolicContext::init_bytes(State& s, const Value& ptr, const std::vector<std::uint8_t>& bytes) const {
  if (bytes.empty())
    return;
  Expr chain = s.mem, view = s.mem_view;
  for (std::size_t k = 0; k < bytes.size(); ++k) {
    const Expr addr = ptr_add(ptr, static_cast<std::int64_t>(k));
    chain = smt::store(chain, addr, smt::bv(8, bytes[k]));
    view = smt::store(view, addr, smt::bv(8, bytes[k]));
  }
  const Expr m = fresh("m", s.mem_count, smt::Sort::array());
  s.assume(smt::eq(m, chain));
  s.mem = m;
  s.mem_view = view;
}

ValueOrDomain<SymbolicContext::Value> SymbolicContext::nondet(State& s, const ir::Type& t) const {
  return fresh("n", s.nondet_count, smt::Sort::bv(value_width(t)));
}

SymbolicContext::Value SymbolicContext::ptr_add(const Value& ptr, std::int64_t bytes) const {
  return smt::apply(smt::Op::Add, ptr, smt::bv(64, static_cast<std::uint64_t>(bytes)));
}

SymbolicContext::Value SymbolicContext::ptr_index(const Value& ptr, const Value& index,
                                                  const ir::Type&, std::uint64_t stride) const {
  const Expr wide = smt::sext(index, 64);
  return smt::apply(smt::Op::Add, ptr, smt::apply(smt::Op::Mul, wide, smt::bv(64, stride)));
}

ValueOrDomain<SymbolicContext::Value> SymbolicContext::binop(State&, ir::Opcode op, const Value& a,
                                                             const Value& b, const ir::Type& t) const {
  const unsigned w = value_width(t);
  check_width(a, w, "binary operand");
  check_width(b, w, "binary operand");
  return smt::apply(smt::from_opcode(op), a, b);
}

std::vector<CmpOutcome<SymbolicState, SymbolicContext::Value>>
SymbolicContext::cmp(const State& s, ir::CmpPred p, const Value& a, const Value& b,
                     const ir::Type&) const {
  if (!(a->sort == b->sort))
    throw ContextError(ErrorKind::Fault, "comparison width mismatch");
  const Expr c = smt::icmp(p, a, b);
  if (smt::is_const(c)) {
    const bool r = c->value != 0;
    return {{s, r ? true_value() : false_value(), r}};
  }
  std::vector<CmpOutcome<State, Value>> out(2);
  out[0] = {s, true_value(), true};
  out[0].state.assume(c);
  out[1] = {s, false_value(), false};
  out[1].state.assume(smt::mk_not(c));
  return out;
}

std::vector<BranchOutcome<SymbolicState>> SymbolicContext::branch(const State& s,
                                                                  const Value& cond) const {
  const Expr c = smt::neq(cond, smt::bv(cond->sort.width, 0));
  if (smt::is_const(c))
    return {{s, c->value != 0}};
  std::vector<BranchOutcome<State>> out(2);
  out[0] = {s, true};
  out[0].state.assume(c);
  out[1] = {s, false};
  out[1].state.assume(smt::mk_not(c));
  return out;
}

SymbolicState SymbolicContext::merge(const State& a, const State& b) {
  State m;
  const auto n = std::max(a.regs.size(), b.regs.size());
  m.regs.resize(n);
  for (std::size_t id = 0; id < n; ++id) {
    const State::Slot none;
    const auto& x = id < a.regs.size() ? a.regs[id] : none;
    const auto& y = id < b.regs.size() ? b.regs[id] : none;
    auto& r = m.regs[id];
    if (x.used && y.used) {
      if (x.var->name != y.var->name || x.width != y.width)
        throw MergeError("register " + std::to_string(id) + " is bound to " + x.var->name +
                         " and " + y.var->name);
      r = x;
      r.set = x.set || y.set;
      r.value = same_value(x.value, y.value) ? x.value : x.var;
    } else if (x.used) {
      r = x;
    } else if (y.used) {
      r = y;
    }
    r.gen = std::max(x.gen, y.gen);
  }
  m.mem_count = std::max(a.mem_count, b.mem_count);
  m.free_count = std::max(a.free_count, b.free_count);
  m.nondet_count = std::max(a.nondet_count, b.nondet_count);
  m.guard_count = std::max(a.guard_count, b.guard_count);

  // common suffix of the two fact lists
  const PathNode* pa = a.path.get();
  const PathNode* pb = b.path.get();
  while (pa && (!pb || pa->size > pb->size))
    pa = pa->next.get();
  while (pb && (!pa || pb->size > pa->size))
    pb = pb->next.get();
  while (pa != pb) {
    pa = pa->next.get();
    pb = pb->next.get();
  }
  std::shared_ptr<const PathNode> common = a.path;
  while (common.get() != pa)
    common = common->next;
  m.path = common;

  const auto ra = facts_above(a.path.get(), pa);
  const auto rb = facts_above(b.path.get(), pa);
  const Expr g = fresh("p", m.guard_count, smt::Sort::bv(8));
  const Expr take_a = smt::neq(g, smt::bv(8, 0));
  m.assume(smt::mk_or({smt::mk_and({take_a, smt::mk_and(ra)}),
                       smt::mk_and({smt::mk_not(take_a), smt::mk_and(rb)})}));

  if (a.mem == b.mem) {
    m.mem = a.mem;
    m.mem_view = a.mem_view == b.mem_view ? a.mem_view : a.mem;
  } else {
    m.mem = fresh("m", m.mem_count, smt::Sort::array());
    m.assume(smt::eq(m.mem, smt::ite(take_a, a.mem, b.mem)));
    m.mem_view = m.mem;
  }
  if (same_value(a.free_ptr, b.free_ptr)) {
    m.free_ptr = a.free_ptr;
  } else {
    m.free_ptr = fresh("f", m.free_count, smt::Sort::bv(64));
    m.assume(smt::eq(m.free_ptr, smt::ite(take_a, a.free_ptr, b.free_ptr)));
  }
  return m;
}

} // namespace lodin
