#pragma once

#include "lodin/engine.hpp"
#include "lodin/search.hpp"
#include "lodin/simulation.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lodin::cli {

inline constexpr const char* kVersion = "1.0.0";

enum class EngineKind : std::uint8_t { Explicit, Bmc };

struct CliConfig {
  std::string program_path;
  std::string query_path;
  std::vector<std::string> entry_points; // empty: main, with a warning
  Generator generator = Generator::Naive;
  Order order = Order::Dfs;
  std::optional<std::uint64_t> seed; // unset: derived from the clock
  EngineKind engine = EngineKind::Explicit;
  std::optional<unsigned> unroll_bound;
  std::string smt_cmd;
  std::uint64_t smt_timeout_ms = 10000;
  Limits limits;
  std::string dump_ir_path;
  std::uint64_t max_runs = 10'000'000;
  bool no_remove_unused = false;
  bool no_merge = false;
  bool eager_prune = false;
  bool trace = false;
  bool serial = false;
};

/// `Histogram: Satisfying Runs` block, one bucket per step between the first
/// and last first-hit step.
std::string render_histogram(const RunStats& stats);

/// The whole driver: returns 0 when every query ran, 1 on an
/// infrastructure error or a failed query, 2 on a usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const CliConfig& cfg, std::ostream& out, std::ostream& err);

} // namespace lodin::cli
