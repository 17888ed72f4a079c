#pragma once

#include "lodin/search.hpp"
#include "lodin/solver.hpp"
#include "lodin/symbolic_context.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lodin {

using SymbolicEngine = Engine<SymbolicContext>;

/// A proposition the symbolic engine cannot evaluate.
class UnsupportedInSymbolic : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct BmcConfig {
  bool merge = true;
  /// Check each branch's path formula and drop infeasible ones immediately.
  bool eager_prune = false;
  /// Unroll loops this many times first; without it the module must be loop-free.
  std::optional<unsigned> unroll_bound;
  Limits limits;
  smt::SolverConfig solver;
};

struct BmcResult {
  Outcome outcome = Outcome::NotSatisfied;
  /// Registers of the head frame at the target call, by name.
  std::vector<std::pair<std::string, BitVec>> model;
  std::string frame_function;
  std::uint64_t states = 0; // pulled from Waiting
  std::uint64_t merges = 0;
  std::uint64_t solver_queries = 0;
  std::string reason;

  /// Model value of register `name` (`%2` also finds `%r2`).
  std::optional<BitVec> value(const std::string& name) const;
};

/// Targets of a call-site proposition: (process, function) pairs, any of which
/// satisfies it. Throws for other atoms or connectives other than ||.
std::vector<std::pair<int, std::string>> callsite_targets(const props::Prop& p);

/// Symbolic reachability of `call @func` by process `proc`, merging states at
/// converging blocks.
BmcResult bmc_reach(const ir::Module& m, const std::vector<std::pair<int, std::string>>& targets,
                    const BmcConfig& cfg, smt::Solver& solver);

inline BmcResult bmc_reach(const ir::Module& m, int proc, const std::string& func,
                           const BmcConfig& cfg) {
  smt::Solver solver(cfg.solver);
  return bmc_reach(m, {{proc, func}}, cfg, solver);
}

} // namespace lodin
