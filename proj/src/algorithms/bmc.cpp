#include "lodin/bmc.hpp"

#include "lodin/cfg.hpp"
#include "lodin/transforms.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <map>

namespace lodin {

std::optional<BitVec> BmcResult::value(const std::string& name) const {
  for (const auto& [n, v] : model)
    if (n == name)
      return v;
  if (name.size() > 1 && name[0] == '%' && std::isdigit(static_cast<unsigned char>(name[1])))
    return value("%r" + name.substr(1));
  return std::nullopt;
}

std::vector<std::pair<int, std::string>> callsite_targets(const props::Prop& p) {
  using K = props::Prop::Kind;
  switch (p.kind) {
  case K::CallSite:
    return {{p.proc, p.func}};
  case K::Or: {
    auto a = callsite_targets(*p.a);
    const auto b = callsite_targets(*p.b);
    a.insert(a.end(), b.begin(), b.end());
    return a;
  }
  case K::False:
    return {};
  default:
    throw UnsupportedInSymbolic("the symbolic engine only checks call sites [i.func] and their "
                                "disjunctions, not " + p.str());
  }
}

namespace {

using State = SymbolicEngine::State;
using Stack = State::Stack;

bool same_expr(const smt::Expr& a, const smt::Expr& b) {
  return a == b || (smt::is_const(a) && smt::is_const(b) && a->sort == b->sort && a->value == b->value);
}

struct FuncCfg {
  std::vector<std::size_t> in_count; // |In(l)|
  std::vector<std::size_t> rpo_index;
};

class Bmc {
public:
  Bmc(const SymbolicEngine& e, const std::vector<std::pair<int, std::string>>& targets,
      const BmcConfig& cfg, smt::Solver& solver)
      : e_(e), targets_(targets), cfg_(cfg), solver_(solver) {
    for (const auto& f : e.module().functions) {
      FuncCfg fc;
      if (!f.is_declaration) {
        const auto info = ir::analyze_cfg(f);
        fc.in_count.resize(f.blocks.size());
        fc.rpo_index.assign(f.blocks.size(), f.blocks.size());
        for (std::size_t b = 0; b < f.blocks.size(); ++b)
          fc.in_count[b] = info.preds[b].size();
        for (std::size_t k = 0; k < info.rpo.size(); ++k)
          fc.rpo_index[static_cast<std::size_t>(info.rpo[k])] = k;
      }
      cfgs_.push_back(std::move(fc));
    }
  }

  BmcResult run(bool unroll_complete);

private:
  struct PoolEntry {
    State state;
    std::size_t remaining = 0;
    std::vector<std::size_t> position;
  };

  const ir::Block& block_of(const Frame<smt::Expr>& fr) const {
    return e_.module().functions[static_cast<std::size_t>(fr.func)].blocks[static_cast<std::size_t>(fr.cur)];
  }
  bool mergeable(const State& s) const;
  std::string pool_key(const State& s) const;
  std::vector<std::size_t> position(const State& s) const;
  void to_pool(State s);
  void flush_one();
  State merge(const State& a, const State& b);
  bool at_target(const State& s) const;
  void decode(const State& s, const smt::Model& model, BmcResult& res) const;

  const SymbolicEngine& e_;
  const std::vector<std::pair<int, std::string>>& targets_;
  const BmcConfig& cfg_;
  smt::Solver& solver_;
  std::vector<FuncCfg> cfgs_;
  std::deque<State> waiting_;
  std::map<std::string, PoolEntry> pool_;
  std::uint64_t merges_ = 0;
};

bool Bmc::mergeable(const State& s) const {
  const auto& fr = s.procs[0].back();
  const auto& fc = cfgs_[static_cast<std::size_t>(fr.func)];
  return fc.in_count[static_cast<std::size_t>(fr.cur)] > 1 && fr.pc == block_of(fr).phi_end();
}

std::string Bmc::pool_key(const State& s) const {
  // the whole stack except the head's previous block and the frees
  std::string k;
  const auto& stack = s.procs[0];
  for (std::size_t d = 0; d < stack.size(); ++d) {
    const auto& fr = stack[d];
    k += std::to_string(fr.func) + ":" + std::to_string(fr.cur) + ":" + std::to_string(fr.pc);
    if (d + 1 < stack.size())
      k += ":" + std::to_string(fr.prev);
    k += "[";
    for (auto r : fr.regs)
      k += std::to_string(r) + ",";
    k += "]";
  }
  return k;
}

std::vector<std::size_t> Bmc::position(const State& s) const {
  std::vector<std::size_t> pos;
  for (const auto& fr : s.procs[0]) {
    pos.push_back(cfgs_[static_cast<std::size_t>(fr.func)].rpo_index[static_cast<std::size_t>(fr.cur)]);
    pos.push_back(fr.pc);
  }
  return pos;
}

State Bmc::merge(const State& a, const State& b) {
  State m;
  m.ctx = SymbolicContext::merge(a.ctx, b.ctx);
  m.procs = a.procs;
  for (std::size_t d = 0; d < m.procs[0].size(); ++d) {
    auto& frees = m.procs[0][d].frees;
    for (const auto& v : b.procs[0][d].frees)
      if (std::none_of(frees.begin(), frees.end(), [&](const smt::Expr& x) { return same_expr(x, v); }))
        frees.push_back(v);
  }
  ++merges_;
  return m;
}

void Bmc::to_pool(State s) {
  const auto key = pool_key(s);
  auto it = pool_.find(key);
  if (it == pool_.end()) {
    const auto& fr = s.procs[0].back();
    const auto in = cfgs_[static_cast<std::size_t>(fr.func)].in_count[static_cast<std::size_t>(fr.cur)];
    auto pos = position(s);
    pool_.emplace(key, PoolEntry{std::move(s), in - 1, std::move(pos)});
    return;
  }
  auto& entry = it->second;
  try {
    entry.state = merge(entry.state, s);
  } catch (const MergeError&) {
    waiting_.push_back(std::move(s)); // explored on its own
  }
  if (--entry.remaining == 0) {
    waiting_.push_back(std::move(entry.state));
    pool_.erase(it);
  }
}

void Bmc::flush_one() {
  // Some predecessors never arrive (infeasible or already merged paths):
  // release the entry earliest in program order first.
  auto best = pool_.begin();
  for (auto it = pool_.begin(); it != pool_.end(); ++it)
    if (it->second.position < best->second.position)
      best = it;
  waiting_.push_back(std::move(best->second.state));
  pool_.erase(best);
}

bool Bmc::at_target(const State& s) const {
  for (const auto& [proc, func] : targets_) {
    if (proc < 0 || static_cast<std::size_t>(proc) >= s.procs.size())
      continue;
    const ir::Instr* in = e_.next_instr(s, static_cast<std::size_t>(proc));
    if (in && in->op == ir::Opcode::Call && in->callee == func)
      return true;
  }
  return false;
}

void Bmc::decode(const State& s, const smt::Model& model, BmcResult& res) const {
  const auto& fr = s.procs[0].back();
  const auto& f = e_.module().functions[static_cast<std::size_t>(fr.func)];
  res.frame_function = f.name;
  for (const auto& ri : f.regs) {
    if (ri.slot < 0)
      continue;
    const auto id = fr.regs[static_cast<std::size_t>(ri.slot)];
    const auto& slot = s.ctx.regs[id];
    if (!slot.used || !slot.set)
      continue;
    BitVec v(slot.width, 0);
    if (smt::is_const(slot.value)) {
      v = BitVec(slot.width, slot.value->value);
    } else if (auto it = model.find(slot.var->name); it != model.end()) {
      v = it->second;
    }
    res.model.emplace_back(ri.name, v);
  }
}

BmcResult Bmc::run(bool unroll_complete) {
  BmcResult res;
  LimitGuard guard(cfg_.limits);
  bool bound_hit = false;
  std::string unknown;
  waiting_.push_back(e_.initial());
  std::vector<SymbolicEngine::Succ> succs;
  const auto queries0 = solver_.queries();
  auto finish = [&](Outcome o) {
    res.outcome = o;
    res.merges = merges_;
    res.solver_queries = solver_.queries() - queries0;
    return res;
  };
  for (;;) {
    if (waiting_.empty()) {
      if (pool_.empty())
        break;
      flush_one();
      continue;
    }
    if (auto why = guard.exceeded(res.states)) {
      res.reason = *why;
      return finish(Outcome::Inconclusive);
    }
    State s = std::move(waiting_.front());
    waiting_.pop_front();
    ++res.states;
    if (s.is_error())
      continue;
    if (at_target(s)) {
      const auto v = solver_.check(s.ctx.path_formula(), true);
      if (v.result == smt::SatResult::Sat) {
        decode(s, v.model, res);
        return finish(Outcome::Satisfied);
      }
      if (v.result == smt::SatResult::Unknown) {
        unknown = v.diagnostic.empty() ? "solver answered unknown" : v.diagnostic;
        continue;
      }
      continue; // infeasible path, and so are its successors
    }
    const auto& head = s.procs[0].back();
    if (block_of(head).label == transforms::kTrapBlock) {
      bound_hit = true;
      continue;
    }
    if (e_.finished(s, 0))
      continue;
    succs.clear();
    e_.step(s, 0, succs);
    const bool prune = cfg_.eager_prune && succs.size() > 1;
    for (auto& n : succs) {
      if (prune && solver_.check(n.state.ctx.path_formula(), false).result == smt::SatResult::Unsat)
        continue;
      if (cfg_.merge && !n.state.is_error() && mergeable(n.state))
        to_pool(std::move(n.state));
      else
        waiting_.push_back(std::move(n.state));
    }
  }
  if (!unknown.empty()) {
    res.reason = unknown;
    return finish(Outcome::Inconclusive);
  }
  return finish(bound_hit && !unroll_complete ? Outcome::NotSatisfiedWithinBound
                                              : Outcome::NotSatisfied);
}

} // namespace

BmcResult bmc_reach(const ir::Module& m, const std::vector<std::pair<int, std::string>>& targets,
                    const BmcConfig& cfg, smt::Solver& solver) {
  if (m.entry_points.size() != 1)
    throw EngineError("symbolic engine is single-threaded only");
  ir::Module mod = m;
  bool complete = true;
  if (cfg.unroll_bound) {
    auto u = transforms::unroll_loops(std::move(mod), *cfg.unroll_bound);
    complete = u.complete();
    mod = std::move(u.module);
  }
  for (const auto& f : mod.functions) {
    if (f.is_declaration)
      continue;
    for (const auto& l : ir::analyze_cfg(f).loops) {
      const auto& label = f.blocks[static_cast<std::size_t>(l.header)].label;
      if (label != transforms::kTrapBlock)
        throw EngineError("loop at %" + label + " in @" + f.name +
                          "; the symbolic engine needs an unroll bound");
    }
  }
  for (const auto& [proc, func] : targets)
    if (proc != 0)
      throw EngineError("process " + std::to_string(proc) + " does not exist; the symbolic engine runs one process");
  const SymbolicEngine e(mod);
  Bmc bmc(e, targets, cfg, solver);
  return bmc.run(complete);
}

} // namespace lodin
