#include "lodin/search.hpp"

#include "lodin/simulation.hpp"

#include <fstream>
#include <stdexcept>
#include <unistd.h>
#include <unordered_set>

namespace lodin {

const char* order_name(Order o) { return o == Order::Dfs ? "dfs" : "bfs"; }

Order order_from_name(const std::string& s) {
  if (s == "dfs")
    return Order::Dfs;
  if (s == "bfs")
    return Order::Bfs;
  throw std::invalid_argument("unknown search order '" + s + "' (expected dfs or bfs)");
}

const char* outcome_name(Outcome o) {
  switch (o) {
  case Outcome::Satisfied:
    return "Satisfied";
  case Outcome::NotSatisfied:
    return "Not Satisfied";
  case Outcome::NotSatisfiedWithinBound:
    return "Not Satisfied within bound";
  case Outcome::Inconclusive:
    return "Inconclusive";
  }
  return "?";
}

std::uint64_t resident_mb() {
  std::ifstream in("/proc/self/statm");
  std::uint64_t size = 0, rss = 0;
  if (!(in >> size >> rss))
    return 0;
  return rss * static_cast<std::uint64_t>(sysconf(_SC_PAGESIZE)) / (1024 * 1024);
}

LimitGuard::LimitGuard(const Limits& l) : limits_(l), start_(std::chrono::steady_clock::now()) {}

std::uint64_t LimitGuard::elapsed_ms() const {
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                        std::chrono::steady_clock::now() - start_)
                                        .count());
}

std::optional<std::string> LimitGuard::exceeded(std::uint64_t states) {
  if (states > limits_.max_states)
    return "state limit of " + std::to_string(limits_.max_states) + " reached";
  // clock and /proc reads are comparatively slow
  if (++calls_ % 256 != 0)
    return std::nullopt;
  if (elapsed_ms() > limits_.max_time_ms)
    return "time limit of " + std::to_string(limits_.max_time_ms) + " ms reached";
  if (calls_ % 4096 == 0 && resident_mb() > limits_.max_mem_mb)
    return "memory limit of " + std::to_string(limits_.max_mem_mb) + " MB reached";
  return std::nullopt;
}

namespace {

template <class T>
void put(std::string& out, T v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof v);
}

} // namespace

std::string canonical_key(const ExplicitNetState& s) {
  std::string out;
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.procs.size()));
  for (const auto& stack : s.procs) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(stack.size()));
    for (const auto& fr : stack) {
      put(out, fr.func);
      put(out, fr.prev);
      put(out, fr.cur);
      put(out, fr.pc);
      put<std::uint32_t>(out, static_cast<std::uint32_t>(fr.regs.size()));
      for (auto r : fr.regs)
        put(out, r);
      put<std::uint32_t>(out, static_cast<std::uint32_t>(fr.frees.size()));
      for (const auto& v : fr.frees)
        ExplicitContext::serialize_value(v, out);
    }
  }
  ExplicitContext::serialize(s.ctx, out);
  put(out, static_cast<std::uint8_t>(s.error.kind));
  if (s.is_error()) {
    put(out, s.error.proc);
    put(out, s.error.func);
    put(out, s.error.block);
    put(out, s.error.pc);
  }
  return out;
}

std::optional<std::size_t> StateStore::add(const ExplicitNetState& s, std::size_t parent,
                                           std::vector<FiredInstr> fired) {
  const auto [it, fresh] = index_.try_emplace(canonical_key(s), nodes_.size());
  if (!fresh)
    return std::nullopt;
  nodes_.push_back({parent, std::move(fired)});
  waiting_.emplace_back(s, it->second);
  return it->second;
}

std::pair<ExplicitNetState, std::size_t> StateStore::pull() {
  if (order_ == Order::Dfs) {
    auto out = std::move(waiting_.back());
    waiting_.pop_back();
    return out;
  }
  auto out = std::move(waiting_.front());
  waiting_.pop_front();
  return out;
}

std::vector<FiredInstr> StateStore::trace_to(std::size_t idx) const {
  std::vector<std::size_t> chain;
  for (std::size_t k = idx; k != npos; k = nodes_[k].parent)
    chain.push_back(k);
  std::vector<FiredInstr> out;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it)
    out.insert(out.end(), nodes_[*it].fired.begin(), nodes_[*it].fired.end());
  return out;
}

ReachResult reachable(const ExplicitEngine& e, const props::Prop& p, const SearchConfig& cfg) {
  const props::Evaluator ev(e);
  StateStore store(cfg.order);
  LimitGuard guard(cfg.limits);
  ReachResult res;
  const auto init = e.initial();
  store.add(init, StateStore::npos, {});
  if (ev.eval(p, init)) {
    res.outcome = Outcome::Satisfied;
    res.states = 1;
    return res;
  }
  std::vector<ExplicitEngine::Succ> succs;
  while (!store.waiting_empty()) {
    if (auto why = guard.exceeded(store.passed())) {
      res.outcome = Outcome::Inconclusive;
      res.reason = *why;
      res.states = store.passed();
      return res;
    }
    auto [s, idx] = store.pull();
    succs.clear();
    e.successors(s, cfg.generator, succs);
    for (auto& n : succs) {
      const bool hit = ev.eval(p, n.state);
      const auto k = store.add(n.state, idx, std::move(n.fired));
      if (k && hit) {
        res.outcome = Outcome::Satisfied;
        res.trace = store.trace_to(*k);
        res.states = store.passed();
        return res;
      }
    }
  }
  res.outcome = Outcome::NotSatisfied;
  res.states = store.passed();
  return res;
}

EnumResult enum_states(const ExplicitEngine& e, const SearchConfig& cfg) {
  const props::Evaluator ev(e);
  StateStore store(cfg.order);
  LimitGuard guard(cfg.limits);
  EnumResult res;
  auto count = [&](const ExplicitNetState& s) {
    if (ev.data_race(s))
      ++res.race_states;
  };
  const auto init = e.initial();
  store.add(init, StateStore::npos, {});
  count(init);
  std::vector<ExplicitEngine::Succ> succs;
  while (!store.waiting_empty()) {
    if (auto why = guard.exceeded(store.passed())) {
      res.complete = false;
      res.reason = *why;
      break;
    }
    auto [s, idx] = store.pull();
    succs.clear();
    e.successors(s, cfg.generator, succs);
    for (auto& n : succs)
      if (store.add(n.state, idx, {}))
        count(n.state);
  }
  res.states = store.passed();
  return res;
}

EnumResult enum_states_smc(const ExplicitEngine& e, std::uint64_t step_bound, std::uint64_t runs,
                           const SearchConfig& cfg) {
  const props::Evaluator ev(e);
  std::unordered_set<std::string> seen;
  LimitGuard guard(cfg.limits);
  EnumResult res;
  auto visit = [&](const ExplicitNetState& s) {
    if (seen.insert(canonical_key(s)).second && ev.data_race(s))
      ++res.race_states;
  };
  for (std::uint64_t run = 0; run < runs && res.complete; ++run) {
    Rng rng = run_rng(cfg.seed, run);
    ExplicitNetState s = e.initial();
    visit(s);
    for (std::uint64_t k = 0; k < step_bound; ++k) {
      if (auto why = guard.exceeded(seen.size())) {
        res.complete = false;
        res.reason = *why;
        break;
      }
      if (s.is_error())
        break; // absorbing: the rest of the run repeats this state
      e.sample_step(s, rng);
      visit(s);
    }
  }
  res.states = seen.size();
  return res;
}

} // namespace lodin
