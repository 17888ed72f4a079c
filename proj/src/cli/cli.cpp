#include "lodin/cli.hpp"

#include "lodin/bmc.hpp"
#include "lodin/parser.hpp"
#include "lodin/printer.hpp"
#include "lodin/props.hpp"
#include "lodin/transforms.hpp"
#include "lodin/typecheck.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

namespace lodin::cli {

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string upper(std::string s) {
  for (auto& c : s)
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad())
    return std::nullopt;
  return ss.str();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos)
    return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

struct QueryLine {
  std::size_t line;
  std::string text;
};

std::vector<QueryLine> query_lines(const std::string& text) {
  std::vector<QueryLine> out;
  std::istringstream in(text);
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    auto t = trim(line);
    if (!t.empty() && t[0] != '#')
      out.push_back({n, std::move(t)});
  }
  return out;
}

void collect_registers(const props::Prop& p, std::vector<const props::Comparand*>& out) {
  if (p.kind == props::Prop::Kind::Compare) {
    if (p.lhs.is_register)
      out.push_back(&p.lhs);
    if (p.rhs.is_register)
      out.push_back(&p.rhs);
  }
  if (p.a)
    collect_registers(*p.a, out);
  if (p.b)
    collect_registers(*p.b, out);
}

// Mirrors the evaluator's lookup so the warnings describe what it will read.
void register_warnings(const ir::Module& m, const props::Prop& p, std::ostream& err) {
  std::vector<const props::Comparand*> regs;
  collect_registers(p, regs);
  for (const auto* c : regs) {
    const auto qname = c->func + "." + c->reg;
    const auto fi = m.find_function(c->func);
    if (!fi) {
      err << "Warning: Function " << c->func << " not found; register " << qname << " reads as 0\n";
      continue;
    }
    const auto& f = m.functions[static_cast<std::size_t>(*fi)];
    auto r = f.find_reg(c->reg);
    if (!r && c->reg.size() > 1 && std::isdigit(static_cast<unsigned char>(c->reg[1])))
      r = f.find_reg("%r" + c->reg.substr(1));
    if (!r || f.regs[static_cast<std::size_t>(*r)].slot < 0) {
      err << "Warning: Register " << qname << " not found; it reads as 0\n";
      continue;
    }
    // i1 values occupy a byte here, so a comparison result is a cast too
    bool boolean = false;
    for (const auto& b : f.blocks)
      for (const auto& in : b.instrs)
        boolean = boolean || (in.result == *r && in.op == ir::Opcode::ICmp);
    const auto& t = f.regs[static_cast<std::size_t>(*r)].type;
    if (boolean || !t.is_int() || t.bits() != c->type.bits)
      err << "Warning: Casting register " << qname << " to integer type " << upper(c->type.str())
          << " - can't guarantee LLVM uses this register as such\n";
  }
}

void print_run_counts(const RunStats& st, std::ostream& out) {
  out << "Total Runs: " << st.total << ", Satisfying Runs: " << st.satisfying << "\n";
}

class Driver {
public:
  Driver(const CliConfig& cfg, std::ostream& out, std::ostream& err) : cfg_(cfg), out_(out), err_(err) {}

  int run();

private:
  bool load();
  void banner();
  bool run_query(const QueryLine& q);
  void reach_explicit(const props::Query& q);
  void reach_bmc(const props::Query& q);
  void estimate(const props::Query& q);
  void test(const props::Query& q);
  void enumerate(const props::Query& q);
  const ExplicitEngine& explicit_engine();
  SearchConfig search_config() const {
    return SearchConfig{cfg_.generator, cfg_.order, cfg_.limits, seed_};
  }
  SimConfig sim_config() const {
    SimConfig s;
    s.seed = seed_;
    s.max_time_ms = cfg_.limits.max_time_ms;
    s.max_runs = cfg_.max_runs;
    s.parallel = !cfg_.serial;
    return s;
  }

  const CliConfig& cfg_;
  std::ostream& out_;
  std::ostream& err_;
  std::uint64_t seed_ = 0;
  std::string smt_cmd_;
  std::vector<std::string> entries_;
  std::vector<std::string> modifications_;
  ir::Module mod_;
  std::string queries_;
  std::unique_ptr<ExplicitEngine> explicit_;
  std::unique_ptr<smt::Solver> solver_;
};

bool Driver::load() {
  const auto text = read_file(cfg_.program_path);
  if (!text) {
    err_ << "error: cannot read program file '" << cfg_.program_path << "'\n";
    return false;
  }
  const auto q = read_file(cfg_.query_path);
  if (!q) {
    err_ << "error: cannot read query file '" << cfg_.query_path << "'\n";
    return false;
  }
  queries_ = *q;
  try {
    mod_ = ir::parse_module(*text);
  } catch (const ir::ParseError& e) {
    err_ << cfg_.program_path << ":" << e.what() << "\n";
    throw std::runtime_error("parse failed");
  }
  return true;
}

void Driver::banner() {
  out_ << "Lodin " << kVersion << "\n";
  out_ << "Importance Ratio: double\n\n";
  out_ << "Module modifications:\n";
  for (const auto& m : modifications_)
    out_ << m << "\n";
  out_ << "Random seed: " << seed_ << "\n";
  if (cfg_.engine == EngineKind::Bmc)
    out_ << "System: merging-symbolic\n";
  else
    out_ << "System: " << generator_name(cfg_.generator) << "-explicit\n";
  out_ << "Search order: " << order_name(cfg_.order) << "\n";
  out_ << "Entry points:";
  for (const auto& e : entries_)
    out_ << " " << e;
  out_ << "\n";
  out_ << "Platform: default\n";
  out_ << "SMT-Backend: " << smt_cmd_ << "\n";
}

const ExplicitEngine& Driver::explicit_engine() {
  if (!explicit_)
    explicit_ = std::make_unique<ExplicitEngine>(mod_);
  return *explicit_;
}

void Driver::reach_explicit(const props::Query& q) {
  const auto& e = explicit_engine();
  const auto r = reachable(e, *q.prop, search_config());
  out_ << outcome_name(r.outcome);
  if (r.outcome == Outcome::Inconclusive)
    out_ << ": " << r.reason;
  out_ << "\n";
  if (cfg_.trace && r.outcome == Outcome::Satisfied) {
    out_ << "Trace:\n";
    for (const auto& f : r.trace)
      out_ << "  " << e.describe(f) << "\n";
  }
}

void Driver::reach_bmc(const props::Query& q) {
  const auto targets = callsite_targets(*q.prop);
  BmcConfig bc;
  bc.merge = !cfg_.no_merge;
  bc.eager_prune = cfg_.eager_prune;
  bc.unroll_bound = cfg_.unroll_bound;
  bc.limits = cfg_.limits;
  if (!solver_)
    solver_ = std::make_unique<smt::Solver>(smt::SolverConfig{smt_cmd_, static_cast<unsigned>(cfg_.smt_timeout_ms)});
  const auto r = bmc_reach(mod_, targets, bc, *solver_);
  out_ << outcome_name(r.outcome);
  if (r.outcome == Outcome::Inconclusive)
    out_ << ": " << r.reason;
  out_ << "\n";
  if (r.outcome == Outcome::Satisfied) {
    out_ << "Model:\n";
    for (const auto& [name, v] : r.model)
      out_ << "  " << r.frame_function << "." << name << " = " << v.as_unsigned() << "\n";
  }
  out_ << "Symbolic states: " << r.states << ", Merges: " << r.merges << "\n";
}

void Driver::estimate(const props::Query& q) {
  const auto r = estimate_probability(explicit_engine(), *q.prop, q.step_bound, q.alpha, q.epsilon, sim_config());
  out_ << "Result: [" << fmt("%f", r.interval.lo) << "," << fmt("%f", r.interval.hi) << " ] with confidence "
       << fmt("%g", r.interval.confidence) << "\n";
  print_run_counts(r.stats, out_);
  if (!r.complete)
    out_ << "Stopped early: " << r.reason << "\n";
  out_ << "\n" << render_histogram(r.stats);
}

void Driver::test(const props::Query& q) {
  const auto r = sprt_test(explicit_engine(), *q.prop, q.step_bound, q.theta, q.alpha, q.beta, q.delta, sim_config());
  out_ << "Result: " << sprt_name(r.decision);
  if (r.decision == SprtDecision::Accept)
    out_ << " (Pr >= " << fmt("%g", q.theta) << ")";
  else if (r.decision == SprtDecision::Reject)
    out_ << " (Pr < " << fmt("%g", q.theta) << ")";
  else
    out_ << ": " << r.reason;
  out_ << "\n";
  print_run_counts(r.stats, out_);
  out_ << "\n" << render_histogram(r.stats);
}

void Driver::enumerate(const props::Query& q) {
  const auto r = q.kind == props::Query::Kind::EnumStates
                     ? enum_states(explicit_engine(), search_config())
                     : enum_states_smc(explicit_engine(), q.step_bound, q.runs, search_config());
  out_ << "States: " << r.states << "\n";
  out_ << "DataRace States: " << r.race_states << "\n";
  if (!r.complete)
    out_ << "Incomplete: " << r.reason << "\n";
}

bool Driver::run_query(const QueryLine& line) {
  props::Query q;
  try {
    q = props::parse_query(line.text);
  } catch (const props::QueryParseError& e) {
    err_ << cfg_.query_path << ":" << line.line << ": " << e.what() << "\n";
    return false;
  }
  out_ << "\nVerifying: " << line.text << "\n";
  out_.flush();
  if (q.prop)
    register_warnings(mod_, *q.prop, err_);
  out_ << "\n";
  try {
    using K = props::Query::Kind;
    switch (q.kind) {
    case K::EReach:
      if (cfg_.engine == EngineKind::Bmc)
        reach_bmc(q);
      else
        reach_explicit(q);
      break;
    case K::PrEstimate:
      estimate(q);
      break;
    case K::PrTest:
      test(q);
      break;
    case K::EnumStates:
    case K::EnumStatesSMC:
      enumerate(q);
      break;
    }
  } catch (const std::exception& e) {
    out_ << "Error\n";
    err_ << "error: " << e.what() << "\n";
    return false;
  }
  return true;
}

int Driver::run() {
  try {
    if (!load())
      return 2;
  } catch (const std::runtime_error&) {
    return 1;
  }

  entries_ = cfg_.entry_points;
  if (entries_.empty()) {
    err_ << "Warning: No entry-point specified. Assuming main.\n";
    entries_ = {"main"};
  }
  try {
    mod_.set_entry_points(entries_);
  } catch (const std::invalid_argument& e) {
    err_ << "error: " << e.what() << "\n";
    return 2;
  }

  if (const auto errs = ir::type_check(mod_); !errs.empty()) {
    for (const auto& e : errs)
      err_ << cfg_.program_path << ":" << e.str() << "\n";
    return 1;
  }

  transforms::TransformConfig tc;
  tc.remove_unused = !cfg_.no_remove_unused;
  if (tc.name_registers)
    modifications_.push_back("Name registers");
  if (tc.lift_constants)
    modifications_.push_back("Lift constant expressions");
  if (tc.remove_unused)
    modifications_.push_back("Remove unused instructions");
  if (cfg_.unroll_bound)
    modifications_.push_back("Unroll loops (" + std::to_string(*cfg_.unroll_bound) + ", symbolic engine)");
  try {
    mod_ = transforms::apply(std::move(mod_), tc);
  } catch (const std::exception& e) {
    err_ << "error: " << e.what() << "\n";
    return 1;
  }
  if (const auto errs = ir::type_check(mod_); !errs.empty()) {
    for (const auto& e : errs)
      err_ << "error: transformed module is ill-typed: " << e.str() << "\n";
    return 1;
  }
  if (!cfg_.dump_ir_path.empty()) {
    std::ofstream d(cfg_.dump_ir_path);
    try {
      d << ir::print_module(cfg_.unroll_bound ? transforms::unroll_loops(mod_, *cfg_.unroll_bound).module : mod_);
    } catch (const std::exception& e) {
      err_ << "error: " << e.what() << "\n";
      return 1;
    }
    if (!d) {
      err_ << "error: cannot write '" << cfg_.dump_ir_path << "'\n";
      return 2;
    }
  }

  seed_ = cfg_.seed ? *cfg_.seed
                    : static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::seconds>(
                                                     std::chrono::system_clock::now().time_since_epoch())
                                                     .count());
  smt_cmd_ = cfg_.smt_cmd.empty() ? smt::default_solver_command() : cfg_.smt_cmd;
  banner();

  bool ok = true;
  for (const auto& q : query_lines(queries_))
    ok = run_query(q) && ok;
  out_.flush();
  return ok ? 0 : 1;
}

} // namespace

std::string render_histogram(const RunStats& stats) {
  std::string s = "Histogram: Satisfying Runs\n";
  if (stats.first_hits.empty())
    return s + "No satisfying runs; the value range is empty\n";
  std::uint64_t max = 0;
  for (const auto& [step, n] : stats.first_hits)
    max = std::max(max, n);
  const auto lo = stats.first_hits.begin()->first;
  const auto hi = stats.first_hits.rbegin()->first;
  s += "Max Frequency:  " + fmt("%f", static_cast<double>(max) / static_cast<double>(stats.satisfying)) + "\n";
  s += "Values in [" + std::to_string(lo) + ", " + std::to_string(hi) + " ] in steps of 1\n";
  s += "[ ";
  for (auto v = lo; v <= hi; ++v) {
    const auto it = stats.first_hits.find(v);
    s += std::to_string(it == stats.first_hits.end() ? 0 : it->second);
    s += v < hi ? ", " : " ]\n";
  }
  return s;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CliConfig cfg;
  std::string generator = "naive", order = "dfs", engine = "explicit";
  std::uint64_t seed = 0;

  CLI::App app{"Model checker for a textual LLVM IR subset", "lodin"};
  app.set_version_flag("--version", std::string("Lodin ") + kVersion);
  app.add_option("program", cfg.program_path, "LLVM IR program (.ll)")->required();
  app.add_option("queries", cfg.query_path, "Query file, one query per line")->required();
  app.add_option("-e,--entry", cfg.entry_points, "Entry point; repeat for more processes (default: main)");
  app.add_option("-g,--generator", generator, "Successor generator: naive, bicycle, binoculars")
      ->capture_default_str();
  app.add_option("--order", order, "Search order: dfs, bfs")->capture_default_str();
  app.add_option("--engine", engine, "Reachability engine: explicit, bmc")->capture_default_str();
  auto* seed_opt = app.add_option("-s,--seed", seed, "Random seed (default: derived from the clock)");
  app.add_option("--unroll", cfg.unroll_bound, "Unroll loops this many times for the symbolic engine")
      ->check(CLI::PositiveNumber);
  app.add_option("--smt-cmd", cfg.smt_cmd, "SMT-LIB v2 solver command (default: $LODIN_SMT_CMD or 'z3 -in')");
  app.add_option("--smt-timeout-ms", cfg.smt_timeout_ms, "Solver timeout per query")->capture_default_str();
  app.add_option("--max-states", cfg.limits.max_states, "State limit")->capture_default_str();
  app.add_option("--max-time-ms", cfg.limits.max_time_ms, "Time limit per query")->capture_default_str();
  app.add_option("--max-mem-mb", cfg.limits.max_mem_mb, "Resident memory limit")->capture_default_str();
  app.add_option("--max-runs", cfg.max_runs, "Simulation run limit per query")->capture_default_str();
  app.add_option("--dump-ir", cfg.dump_ir_path, "Write the transformed module here");
  app.add_flag("--no-remove-unused", cfg.no_remove_unused, "Keep unused instructions");
  app.add_flag("--no-merge", cfg.no_merge, "Disable symbolic state merging");
  app.add_flag("--eager-prune", cfg.eager_prune, "Drop infeasible symbolic branches immediately");
  app.add_flag("--trace", cfg.trace, "Print a witness trace for satisfied reachability queries");
  app.add_flag("--serial", cfg.serial, "Simulate on one thread");

  try {
    app.parse(argc, argv);
    if (*seed_opt)
      cfg.seed = seed;
    cfg.generator = generator_from_name(generator);
    cfg.order = order_from_name(order);
    if (engine == "explicit")
      cfg.engine = EngineKind::Explicit;
    else if (engine == "bmc")
      cfg.engine = EngineKind::Bmc;
    else
      throw std::invalid_argument("unknown engine '" + engine + "' (explicit, bmc)");
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << "Lodin " << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "Run with --help for usage.\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return run(cfg, out, err);
}

int run(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  Driver d(cfg, out, err);
  return d.run();
}

} // namespace lodin::cli
