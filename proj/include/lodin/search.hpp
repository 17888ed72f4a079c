#pragma once

#include "lodin/engine.hpp"
#include "lodin/explicit_context.hpp"
#include "lodin/props.hpp"

#include <chrono>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace lodin {

enum class Order : std::uint8_t { Dfs, Bfs };

const char* order_name(Order o);
Order order_from_name(const std::string& s);

enum class Outcome : std::uint8_t { Satisfied, NotSatisfied, NotSatisfiedWithinBound, Inconclusive };

const char* outcome_name(Outcome o);

struct Limits {
  std::uint64_t max_states = 50'000'000;
  std::uint64_t max_time_ms = 3'600'000;
  std::uint64_t max_mem_mb = 16'384;
};

/// Tracks time, state count and resident memory against Limits.
class LimitGuard {
public:
  explicit LimitGuard(const Limits& l);
  /// Name of the first exceeded limit, if any.
  std::optional<std::string> exceeded(std::uint64_t states);
  std::uint64_t elapsed_ms() const;

private:
  Limits limits_;
  std::chrono::steady_clock::time_point start_;
  std::uint64_t calls_ = 0;
};

/// Resident set size of this process in MiB (0 if unknown).
std::uint64_t resident_mb();

struct SearchConfig {
  Generator generator = Generator::Naive;
  Order order = Order::Dfs;
  Limits limits;
  std::uint64_t seed = 0;
};

using ExplicitEngine = Engine<ExplicitContext>;
using ExplicitNetState = ExplicitEngine::State;

/// Canonical byte encoding of a network state. Equal states give equal keys.
std::string canonical_key(const ExplicitNetState& s);

/// Passed set with parent links, and the Waiting list.
class StateStore {
public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  explicit StateStore(Order o) : order_(o) {}

  /// Adds s to Passed and Waiting unless an equal state was seen before.
  /// Returns its index when new.
  std::optional<std::size_t> add(const ExplicitNetState& s, std::size_t parent,
                                 std::vector<FiredInstr> fired);
  bool waiting_empty() const { return waiting_.empty(); }
  /// Removes the next state by the search order.
  std::pair<ExplicitNetState, std::size_t> pull();
  std::size_t passed() const { return nodes_.size(); }
  std::size_t waiting() const { return waiting_.size(); }
  /// Instructions fired from the initial state to state idx.
  std::vector<FiredInstr> trace_to(std::size_t idx) const;

private:
  struct Node {
    std::size_t parent;
    std::vector<FiredInstr> fired;
  };
  Order order_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<Node> nodes_;
  std::deque<std::pair<ExplicitNetState, std::size_t>> waiting_;
};

struct ReachResult {
  Outcome outcome = Outcome::NotSatisfied;
  std::vector<FiredInstr> trace; // Satisfied only
  std::uint64_t states = 0;
  std::string reason; // Inconclusive only
};

/// Passed/Waiting fixpoint search for a state satisfying p.
ReachResult reachable(const ExplicitEngine& e, const props::Prop& p, const SearchConfig& cfg);

struct EnumResult {
  std::uint64_t states = 0;
  std::uint64_t race_states = 0;
  bool complete = true;
  std::string reason;
};

/// Counts every reachable state and those with a data race.
EnumResult enum_states(const ExplicitEngine& e, const SearchConfig& cfg);

/// Distinct states (and data-race states) met on `runs` random runs of
/// `step_bound` steps each.
EnumResult enum_states_smc(const ExplicitEngine& e, std::uint64_t step_bound, std::uint64_t runs,
                           const SearchConfig& cfg);

} // namespace lodin
