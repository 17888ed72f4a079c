#pragma once

// Template definitions for Engine<C>; included from engine.hpp.

#include "lodin/printer.hpp"

#include <algorithm>
#include <tuple>

namespace lodin {

namespace detail {

inline std::int64_t sign_extend(std::uint64_t v, unsigned bits) {
  if (bits >= 64)
    return static_cast<std::int64_t>(v);
  const std::uint64_t m = std::uint64_t{1} << (bits - 1);
  v &= (std::uint64_t{1} << bits) - 1;
  return static_cast<std::int64_t>((v ^ m) - m);
}

} // namespace detail

template <Context C>
Engine<C>::Engine(const ir::Module& m, C ctx, EngineOptions opts, PlatformPlugin<C> plugin)
    : mod_(m), ctx_(std::move(ctx)), opts_(opts), plugin_(std::move(plugin)) {
  if (m.entry_points.empty())
    throw EngineError("module has no entry points");
  for (auto e : m.entry_points) {
    const auto& f = m.functions[static_cast<std::size_t>(e)];
    if (!f.params.empty() || !f.ret_type.is_void())
      throw EngineError("entry point @" + f.name + " must take no parameters and return void");
    mod_.functions.push_back(make_stub(f));
    stubs_.push_back(static_cast<std::int32_t>(mod_.functions.size() - 1));
    entries_.push_back(e);
  }
  init_ctx_ = ctx_.initial();
  try {
    for (const auto& g : mod_.globals) {
      const Value ptr = ctx_.alloc(init_ctx_, g.type);
      if (!g.init.empty())
        ctx_.init_bytes(init_ctx_, ptr, g.init);
      globals_.push_back(ptr);
    }
  } catch (const ContextError& e) {
    throw EngineError(std::string("cannot allocate globals: ") + e.what());
  }
}

template <Context C>
typename Engine<C>::State Engine<C>::initial() const {
  State s;
  s.ctx = init_ctx_;
  for (auto stub : stubs_) {
    Frame<Value> fr;
    fr.func = stub;
    s.procs.push_back({fr});
  }
  return s;
}

template <Context C>
const ir::Instr* Engine<C>::next_instr(const State& s, std::size_t p) const {
  if (p >= s.procs.size() || s.procs[p].empty())
    return nullptr;
  const auto& fr = s.procs[p].back();
  const auto& b = func(fr.func).blocks[static_cast<std::size_t>(fr.cur)];
  return fr.pc < b.instrs.size() ? &b.instrs[fr.pc] : nullptr;
}

template <Context C>
bool Engine<C>::finished(const State& s, std::size_t p) const {
  const auto& st = s.procs[p];
  return st.size() == 1 && st.back().cur == 1;
}

template <Context C>
typename Engine<C>::Value Engine<C>::eval(const typename C::State& cs, const Frame<Value>& fr,
                                          ir::RegIdx r) const {
  const auto& ri = func(fr.func).regs[static_cast<std::size_t>(r)];
  switch (ri.kind) {
  case ir::RegKind::Value:
  case ir::RegKind::Param:
    return ctx_.eval_reg(cs, fr.regs[static_cast<std::size_t>(ri.slot)], ri.type);
  case ir::RegKind::Constant:
    return ctx_.constant(ri.type, ri.constant);
  case ir::RegKind::Global:
    return globals_[static_cast<std::size_t>(ri.global)];
  case ir::RegKind::ConstExpr:
    break;
  }
  throw EngineError("constant expression operand in @" + func(fr.func).name +
                    " was not lifted");
}

template <Context C>
typename Engine<C>::Value Engine<C>::eval_operand(const State& s, std::size_t p,
                                                  ir::RegIdx r) const {
  return eval(s.ctx, s.procs[p].back(), r);
}

template <Context C>
typename Engine<C>::State Engine<C>::error_state(const State& s, std::size_t p, ErrorKind k,
                                                 const std::string& msg) const {
  State e = s;
  const auto& fr = s.procs[p].back();
  e.error = {k, static_cast<std::int32_t>(p), fr.func, fr.cur, fr.pc, msg};
  return e;
}

template <Context C>
void Engine<C>::set_result(State& s, std::size_t p, const ir::Instr& in, const Value& v) const {
  auto& fr = s.procs[p].back();
  const auto& ri = func(fr.func).regs[static_cast<std::size_t>(in.result)];
  ctx_.set_reg(s.ctx, fr.regs[static_cast<std::size_t>(ri.slot)], v, ri.type);
}

template <Context C>
void Engine<C>::push_call(State& s, std::size_t p, std::int32_t callee,
                          const std::vector<Value>& args) const {
  const auto& f = func(callee);
  Frame<Value> fr;
  fr.func = callee;
  fr.regs.resize(static_cast<std::size_t>(f.num_slots()));
  for (const auto& ri : f.regs)
    if (ri.slot >= 0)
      fr.regs[static_cast<std::size_t>(ri.slot)] = ctx_.make_reg(s.ctx, ri.type);
  for (std::size_t k = 0; k < f.params.size(); ++k) {
    const auto& ri = f.regs[static_cast<std::size_t>(f.params[k])];
    ctx_.set_reg(s.ctx, fr.regs[static_cast<std::size_t>(ri.slot)], args[k], ri.type);
  }
  s.procs[p].push_back(std::move(fr));
}

template <Context C>
void Engine<C>::do_return(State& s, std::size_t p, const Value* ret) const {
  auto& stack = s.procs[p];
  {
    auto& fr = stack.back();
    for (const auto& ptr : fr.frees)
      ctx_.free(s.ctx, ptr);
    for (auto id : fr.regs)
      ctx_.release_reg(s.ctx, id);
  }
  stack.pop_back();
  if (stack.empty())
    throw EngineError("return from a stub frame");
  auto& caller = stack.back();
  const auto& call = func(caller.func).blocks[static_cast<std::size_t>(caller.cur)].instrs[caller.pc];
  if (call.result >= 0) {
    if (!ret)
      throw ContextError(ErrorKind::Fault, "void return into a value call");
    set_result(s, p, call, *ret);
  }
  ++caller.pc;
}

template <Context C>
void Engine<C>::emit_domain(const State& base, std::size_t p, const ir::Instr& in, unsigned bits,
                            ErrorKind too_wide, Mode mode, std::vector<Succ>& out) const {
  const double log_size = bits * std::log(2.0);
  const bool enumerable = bits < 64 && (std::uint64_t{1} << bits) <= opts_.nondet_cap;
  if (mode.rng && (enumerable || in.op == ir::Opcode::Nondet)) {
    std::uint64_t k = (*mode.rng)();
    State t = base;
    set_result(t, p, in, ctx_.domain_value(bits, ir::truncate(k, bits)));
    ++t.procs[p].back().pc;
    out.push_back({std::move(t), -log_size, {}});
    return;
  }
  if (!enumerable) {
    if (in.op == ir::Opcode::Nondet)
      throw EngineError("nondet " + in.type.str() + " has 2^" + std::to_string(bits) +
                        " values, above the enumeration cap of " +
                        std::to_string(opts_.nondet_cap));
    out.push_back({error_state(base, p, too_wide,
                               std::string(ir::opcode_name(in.op)) + " result is undefined"),
                   0.0, {}});
    return;
  }
  const std::uint64_t n = std::uint64_t{1} << bits;
  for (std::uint64_t k = 0; k < n; ++k) {
    State t = base;
    set_result(t, p, in, ctx_.domain_value(bits, k));
    ++t.procs[p].back().pc;
    out.push_back({std::move(t), -log_size, {}});
  }
}

template <Context C>
void Engine<C>::exec(const State& s, std::size_t p, Mode mode, std::vector<Succ>& out) const {
  const auto first = out.size();
  try {
    exec_unchecked(s, p, mode, out);
  } catch (const ContextError& e) {
    out.resize(first);
    out.push_back({error_state(s, p, e.kind(), e.what()), 0.0, {}});
  }
  const auto& fr = s.procs[p].back();
  const FiredInstr fired{static_cast<std::int32_t>(p), fr.func, fr.cur, fr.pc};
  const double n = static_cast<double>(out.size() - first);
  for (auto k = first; k < out.size(); ++k) {
    out[k].fired.push_back(fired);
    // Successors without a domain weight share the proc's choice uniformly.
    if (out[k].log_weight == 0.0 && n > 1)
      out[k].log_weight = -std::log(n);
  }
}

template <Context C>
void Engine<C>::exec_unchecked(const State& s, std::size_t p, Mode mode,
                               std::vector<Succ>& out) const {
  using ir::Opcode;
  const auto& fr = s.procs[p].back();
  const auto& f = func(fr.func);
  const auto& block = f.blocks[static_cast<std::size_t>(fr.cur)];
  if (fr.pc >= block.instrs.size())
    throw EngineError("program counter past the end of %" + block.label);
  const ir::Instr& in = block.instrs[fr.pc];
  auto val = [&](std::size_t k) { return eval(s.ctx, fr, in.ops[k]); };
  auto advance = [&](State t) {
    ++t.procs[p].back().pc;
    out.push_back({std::move(t), 0.0, {}});
  };

  switch (in.op) {
  case Opcode::ICmp: {
    auto outcomes = ctx_.cmp(s.ctx, in.pred, val(0), val(1), in.type);
    for (auto& o : outcomes) {
      State t{s.procs, std::move(o.state), s.error};
      set_result(t, p, in, o.value);
      advance(std::move(t));
    }
    return;
  }
  case Opcode::Alloca: {
    State t = s;
    const Value ptr = ctx_.alloc(t.ctx, in.type);
    t.procs[p].back().frees.push_back(ptr);
    set_result(t, p, in, ptr);
    advance(std::move(t));
    return;
  }
  case Opcode::Gep: {
    Value ptr = val(0);
    const auto& idx = f.regs[static_cast<std::size_t>(in.ops[1])];
    const auto stride = ir::bsize(in.type);
    if (idx.kind == ir::RegKind::Constant) {
      const auto w = idx.type.is_int() ? idx.type.bits() : 64;
      const std::int64_t k = detail::sign_extend(idx.constant, w);
      ptr = ctx_.ptr_add(ptr, k * static_cast<std::int64_t>(stride));
    } else {
      ptr = ctx_.ptr_index(ptr, val(1), idx.type, stride);
    }
    std::vector<std::int64_t> path{0};
    for (std::size_t k = 2; k < in.ops.size(); ++k)
      path.push_back(static_cast<std::int64_t>(f.regs[static_cast<std::size_t>(in.ops[k])].constant));
    const auto off = ir::type_offset(in.type, path).offset;
    if (off != 0)
      ptr = ctx_.ptr_add(ptr, off);
    State t = s;
    set_result(t, p, in, ptr);
    advance(std::move(t));
    return;
  }
  case Opcode::Load: {
    State t = s;
    const Value v = ctx_.load(s.ctx, val(0), in.type);
    set_result(t, p, in, v);
    advance(std::move(t));
    return;
  }
  case Opcode::Store: {
    State t = s;
    ctx_.store(t.ctx, val(0), val(1), in.type);
    advance(std::move(t));
    return;
  }
  case Opcode::RetVoid:
  case Opcode::Ret: {
    State t = s;
    if (in.op == Opcode::Ret) {
      const Value v = val(0);
      do_return(t, p, &v);
    } else {
      do_return(t, p, nullptr);
    }
    out.push_back({std::move(t), 0.0, {}});
    return;
  }
  case Opcode::Br: {
    State t = s;
    auto& tf = t.procs[p].back();
    tf.prev = tf.cur;
    tf.cur = in.labels[0];
    tf.pc = 0;
    out.push_back({std::move(t), 0.0, {}});
    return;
  }
  case Opcode::CondBr: {
    auto outcomes = ctx_.branch(s.ctx, val(0));
    for (auto& o : outcomes) {
      State t{s.procs, std::move(o.state), s.error};
      auto& tf = t.procs[p].back();
      tf.prev = tf.cur;
      tf.cur = o.truth ? in.labels[0] : in.labels[1];
      tf.pc = 0;
      out.push_back({std::move(t), 0.0, {}});
    }
    return;
  }
  case Opcode::Phi: {
    // Big step: read every incoming value first, then write all results.
    const auto end = block.phi_end();
    std::vector<Value> vals;
    vals.reserve(end);
    for (std::size_t k = fr.pc; k < end; ++k) {
      const auto& phi = block.instrs[k];
      const auto it = std::find(phi.labels.begin(), phi.labels.end(), fr.prev);
      if (it == phi.labels.end())
        throw ContextError(ErrorKind::Fault, "phi has no incoming value for %" +
                                                 f.blocks[static_cast<std::size_t>(fr.prev)].label);
      vals.push_back(eval(s.ctx, fr, phi.ops[static_cast<std::size_t>(it - phi.labels.begin())]));
    }
    State t = s;
    for (std::size_t k = fr.pc; k < end; ++k)
      set_result(t, p, block.instrs[k], vals[k - fr.pc]);
    t.procs[p].back().pc = static_cast<std::uint32_t>(end);
    out.push_back({std::move(t), 0.0, {}});
    return;
  }
  case Opcode::Call: {
    std::vector<Value> args;
    args.reserve(in.ops.size());
    for (std::size_t k = 0; k < in.ops.size(); ++k)
      args.push_back(val(k));
    const auto callee = mod_.find_function(in.callee);
    if (callee && !func(*callee).is_declaration) {
      State t = s;
      push_call(t, p, *callee, args);
      out.push_back({std::move(t), 0.0, {}});
      return;
    }
    const auto* fn = plugin_.find(in.callee);
    if (!fn)
      throw EngineError("call to unknown external function @" + in.callee);
    State t = s;
    auto r = (*fn)(ctx_, t.ctx, args, in.type);
    if (in.result >= 0) {
      if (!r)
        throw ContextError(ErrorKind::Fault, "@" + in.callee + " returned no value");
      set_result(t, p, in, *r);
    }
    advance(std::move(t));
    return;
  }
  case Opcode::Nondet: {
    State t = s;
    auto r = ctx_.nondet(t.ctx, in.type);
    if (auto* v = std::get_if<Value>(&r)) {
      set_result(t, p, in, *v);
      advance(std::move(t));
    } else {
      emit_domain(t, p, in, std::get<FullDomain>(r).bits, ErrorKind::UndefinedResult, mode, out);
    }
    return;
  }
  default:
    break;
  }
  // binary operations
  State t = s;
  auto r = ctx_.binop(t.ctx, in.op, val(0), val(1), in.type);
  if (auto* v = std::get_if<Value>(&r)) {
    set_result(t, p, in, *v);
    advance(std::move(t));
    return;
  }
  const auto kind = ir::is_division(in.op) ? ErrorKind::DivByZero : ErrorKind::UndefinedResult;
  emit_domain(t, p, in, std::get<FullDomain>(r).bits, kind, mode, out);
}

template <Context C>
void Engine<C>::step(const State& s, std::size_t p, std::vector<Succ>& out) const {
  if (s.is_error())
    return;
  exec(s, p, Mode{}, out);
}

template <Context C>
void Engine<C>::bicycle(const State& s, std::size_t p, std::vector<Succ>& out) const {
  std::vector<Succ> first;
  exec(s, p, Mode{}, first);
  std::vector<Succ> tmp;
  for (auto& succ : first) {
    // Extend while the next instruction is internal and has exactly one outcome.
    std::vector<std::tuple<std::size_t, ir::BlockIdx, std::uint32_t>> seen;
    for (std::size_t guard = 0; guard < 100000 && !succ.state.is_error(); ++guard) {
      const ir::Instr* nx = next_instr(succ.state, p);
      if (!nx || is_visible(*nx))
        break;
      const auto& fr = succ.state.procs[p].back();
      const auto key = std::make_tuple(succ.state.procs[p].size(), fr.cur, fr.pc);
      if (std::find(seen.begin(), seen.end(), key) != seen.end())
        break;
      seen.push_back(key);
      tmp.clear();
      exec(succ.state, p, Mode{}, tmp);
      if (tmp.size() != 1 || tmp[0].state.is_error())
        break;
      succ.state = std::move(tmp[0].state);
      succ.fired.push_back(tmp[0].fired.front());
    }
    out.push_back(std::move(succ));
  }
}

template <Context C>
void Engine<C>::binoculars(const State& s, std::vector<Succ>& out) const {
  std::vector<std::size_t> internal;
  for (std::size_t p = 0; p < s.procs.size(); ++p) {
    const ir::Instr* nx = next_instr(s, p);
    if (!nx)
      continue;
    if (is_visible(*nx))
      exec(s, p, Mode{}, out);
    else
      internal.push_back(p);
  }
  if (internal.empty())
    return;
  // Advance every internal process by one instruction, in ascending order.
  std::vector<Succ> frontier{{s, 0.0, {}}};
  std::vector<Succ> next;
  for (auto p : internal) {
    next.clear();
    for (auto& f : frontier) {
      if (f.state.is_error()) {
        next.push_back(std::move(f));
        continue;
      }
      const auto before = next.size();
      exec(f.state, p, Mode{}, next);
      for (auto k = before; k < next.size(); ++k) {
        next[k].log_weight += f.log_weight;
        next[k].fired.insert(next[k].fired.begin(), f.fired.begin(), f.fired.end());
      }
    }
    frontier.swap(next);
  }
  for (auto& f : frontier)
    out.push_back(std::move(f));
}

template <Context C>
void Engine<C>::successors(const State& s, Generator g, std::vector<Succ>& out) const {
  if (s.is_error())
    return;
  switch (g) {
  case Generator::Naive:
    for (std::size_t p = 0; p < s.procs.size(); ++p)
      exec(s, p, Mode{}, out);
    return;
  case Generator::Bicycle:
    for (std::size_t p = 0; p < s.procs.size(); ++p)
      bicycle(s, p, out);
    return;
  case Generator::Binoculars:
    binoculars(s, out);
    return;
  }
}

template <Context C>
double Engine<C>::sample_step(State& s, Rng& rng) const {
  if (s.is_error() || s.procs.empty())
    return 0.0; // absorbing
  const std::size_t n = s.procs.size();
  const std::size_t p = n == 1 ? 0 : std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  std::vector<Succ> outs;
  exec(s, p, Mode{&rng}, outs);
  const std::size_t k =
      outs.size() == 1 ? 0 : std::uniform_int_distribution<std::size_t>(0, outs.size() - 1)(rng);
  double lp = -std::log(static_cast<double>(n));
  // Sampled domain values carry their own weight; plain alternatives are uniform.
  lp += outs[k].log_weight;
  s = std::move(outs[k].state);
  return lp;
}

template <Context C>
std::string Engine<C>::describe(const FiredInstr& f) const {
  const auto& fn = func(f.func);
  const auto& b = fn.blocks[static_cast<std::size_t>(f.block)];
  std::string where = "[" + std::to_string(f.proc) + "] @" + fn.name + " %" + b.label + ": ";
  if (f.pc < b.instrs.size())
    return where + ir::print_instr(fn, b.instrs[f.pc]);
  return where + "<end>";
}

} // namespace lodin
