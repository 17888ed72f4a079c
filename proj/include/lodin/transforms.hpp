#pragma once

#include "lodin/ir.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lodin::transforms {

class UnrollError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct TransformConfig {
  bool name_registers = true;
  bool lift_constants = true;
  bool remove_unused = true;
  std::optional<unsigned> unroll_bound;
};

/// Gives numbered registers (`%0`) readable names (`%r0`).
ir::Module name_registers(ir::Module m);

/// Replaces constant-expression operands by instructions placed before their use.
ir::Module lift_constant_exprs(ir::Module m);

/// Deletes pure instructions (arithmetic, logic, icmp, gep, phi) whose result
/// is never read, to a fixpoint.
ir::Module remove_unused(ir::Module m);

struct LoopUnroll {
  std::string func;
  std::string header;
  unsigned copies = 0;
  /// Header visits per entry, when the counter pattern decides it.
  std::optional<std::uint64_t> trip_count;
  bool complete = false;
};

struct UnrollResult {
  ir::Module module;
  std::vector<LoopUnroll> loops;

  bool complete() const {
    for (const auto& l : loops)
      if (!l.complete)
        return false;
    return true;
  }
};

inline constexpr const char* kTrapBlock = "__unroll_exhausted";
inline constexpr const char* kTrapFunction = "__lodin_unroll_bound";

/// Replicates every natural loop at most n times. The back edge of the last
/// copy enters a self-looping trap block that calls @__lodin_unroll_bound.
UnrollResult unroll_loops(ir::Module m, unsigned n);

struct TransformReport {
  std::vector<LoopUnroll> loops;
  bool unroll_complete = true;
};

/// Runs the configured transforms in order: naming, lifting, removal, unrolling.
ir::Module apply(ir::Module m, const TransformConfig& cfg, TransformReport* report = nullptr);

} // namespace lodin::transforms
