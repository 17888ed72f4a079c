#pragma once

#include "lodin/smt.hpp"

#include <chrono>
#include <map>
#include <string>
#include <sys/types.h>
#include <vector>

namespace lodin::smt {

enum class SatResult : std::uint8_t { Sat, Unsat, Unknown };

const char* sat_result_name(SatResult r);

/// Bitvector values by variable name. Non-bitvector model entries are skipped.
using Model = std::map<std::string, BitVec>;

struct Verdict {
  SatResult result = SatResult::Unknown;
  Model model; // only on Sat with a requested model
  std::string diagnostic;
};

class ModelError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct SExpr {
  bool is_atom = true;
  std::string atom;
  std::vector<SExpr> list;
};

/// All top-level s-expressions in `text`. Throws ModelError on unbalanced input.
std::vector<SExpr> parse_sexprs(const std::string& text);

/// Reads a `(get-model)` answer: `(define-fun v () (_ BitVec n) #x..)` entries
/// with `#x`, `#b` or `(_ bvK n)` literals.
Model parse_model(const std::string& text);

/// `LODIN_SMT_CMD` when set, otherwise `z3 -in`.
std::string default_solver_command();

struct SolverConfig {
  std::string command = default_solver_command();
  unsigned timeout_ms = 10000;
};

/// An SMT-LIB v2 solver running as a child process, fed one script per query
/// and reset in between. The process is (re)started on demand.
class Solver {
public:
  explicit Solver(SolverConfig cfg = {});
  ~Solver();
  Solver(const Solver&) = delete;
  Solver& operator=(const Solver&) = delete;

  Verdict check(const Expr& formula, bool want_model);

  const SolverConfig& config() const { return cfg_; }
  std::size_t queries() const { return queries_; }
  std::chrono::milliseconds time_spent() const { return spent_; }

private:
  bool start(std::string& err);
  void stop();
  /// Sends `script`, reads until the end marker; false on timeout or exit.
  bool exchange(const std::string& script, std::string& reply, std::string& err);

  SolverConfig cfg_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string pending_; // output read past the last marker
  std::size_t queries_ = 0;
  std::chrono::milliseconds spent_{0};
};

} // namespace lodin::smt
