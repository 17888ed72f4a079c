#pragma once

#include "lodin/context.hpp"
#include "lodin/plugin.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace lodin {

/// Infrastructure failure: the model cannot be executed as asked.
class EngineError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class Generator : std::uint8_t { Naive, Bicycle, Binoculars };

const char* generator_name(Generator g);
Generator generator_from_name(const std::string& s);

template <class V>
struct Frame {
  std::int32_t func = 0;
  ir::BlockIdx prev = 0;
  ir::BlockIdx cur = 0;
  std::uint32_t pc = 0;
  std::vector<RegVarId> regs; // by register slot
  std::vector<V> frees;
};

struct ErrorInfo {
  ErrorKind kind = ErrorKind::None;
  std::int32_t proc = -1;
  std::int32_t func = -1;
  ir::BlockIdx block = -1;
  std::uint32_t pc = 0;
  std::string message;
};

template <Context C>
struct NetState {
  using Value = typename C::Value;
  using Stack = std::vector<Frame<Value>>;

  std::vector<Stack> procs;
  typename C::State ctx;
  ErrorInfo error;

  bool is_error() const { return error.kind != ErrorKind::None; }
};

struct FiredInstr {
  std::int32_t proc = -1;
  std::int32_t func = -1;
  ir::BlockIdx block = -1;
  std::uint32_t pc = 0;
};

template <Context C>
struct Successor {
  NetState<C> state;
  /// log of the probability of choosing this outcome among the proc's outcomes.
  double log_weight = 0.0;
  std::vector<FiredInstr> fired;
};

struct EngineOptions {
  /// Full-domain results with at most this many values are enumerated.
  std::uint64_t nondet_cap = 256;
};

using Rng = std::mt19937_64;

/// Interprets a module under context C. The module is copied and extended
/// with one stub function per entry point.
template <Context C>
class Engine {
public:
  using Value = typename C::Value;
  using State = NetState<C>;
  using Succ = Successor<C>;

  Engine(const ir::Module& m, C ctx = C{}, EngineOptions opts = {},
         PlatformPlugin<C> plugin = default_plugin<C>());

  const ir::Module& module() const { return mod_; }
  const C& context() const { return ctx_; }
  const EngineOptions& options() const { return opts_; }
  std::size_t num_procs() const { return stubs_.size(); }
  /// Function index of the entry point run by process p.
  std::int32_t entry_of(std::size_t p) const { return entries_[p]; }
  const std::vector<Value>& globals() const { return globals_; }

  State initial() const;

  /// Next instruction of process p, or nullptr when it has none.
  const ir::Instr* next_instr(const State& s, std::size_t p) const;
  static bool is_visible(const ir::Instr& in) {
    return in.op == ir::Opcode::Load || in.op == ir::Opcode::Store ||
           in.op == ir::Opcode::Call || in.op == ir::Opcode::Nondet;
  }
  /// True when the process is inside its stub after the entry point returned.
  bool finished(const State& s, std::size_t p) const;

  /// All outcomes of one instruction of process p.
  void step(const State& s, std::size_t p, std::vector<Succ>& out) const;
  void successors(const State& s, Generator g, std::vector<Succ>& out) const;

  /// One random transition; returns log P of the choice (selectP * selectV).
  double sample_step(State& s, Rng& rng) const;

  /// Evaluates an operand of the head frame of process p.
  Value eval_operand(const State& s, std::size_t p, ir::RegIdx r) const;

  std::string describe(const FiredInstr& f) const;

private:
  struct Mode {
    Rng* rng = nullptr; // non-null: sample full domains instead of enumerating
  };

  const ir::Func& func(std::int32_t f) const { return mod_.functions[static_cast<std::size_t>(f)]; }
  Value eval(const typename C::State& cs, const Frame<Value>& fr, ir::RegIdx r) const;
  void exec(const State& s, std::size_t p, Mode mode, std::vector<Succ>& out) const;
  void exec_unchecked(const State& s, std::size_t p, Mode mode, std::vector<Succ>& out) const;
  void push_call(State& s, std::size_t p, std::int32_t callee, const std::vector<Value>& args) const;
  void do_return(State& s, std::size_t p, const Value* ret) const;
  void set_result(State& s, std::size_t p, const ir::Instr& in, const Value& v) const;
  void emit_domain(const State& base, std::size_t p, const ir::Instr& in, unsigned bits,
                   ErrorKind too_wide, Mode mode, std::vector<Succ>& out) const;
  State error_state(const State& s, std::size_t p, ErrorKind k, const std::string& msg) const;
  void bicycle(const State& s, std::size_t p, std::vector<Succ>& out) const;
  void binoculars(const State& s, std::vector<Succ>& out) const;

  ir::Module mod_;
  C ctx_;
  EngineOptions opts_;
  PlatformPlugin<C> plugin_;
  std::vector<std::int32_t> stubs_;
  std::vector<std::int32_t> entries_;
  std::vector<Value> globals_;
  typename C::State init_ctx_;
};

ir::Func make_stub(const ir::Func& entry);

} // namespace lodin

#include "lodin/engine_impl.hpp"
