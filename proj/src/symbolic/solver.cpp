#include "lodin/solver.hpp"

#include <cctype>
#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace lodin::smt {

namespace {

constexpr const char* kMarker = "lodin-end-of-answer";

} // namespace

const char* sat_result_name(SatResult r) {
  switch (r) {
  case SatResult::Sat:
    return "sat";
  case SatResult::Unsat:
    return "unsat";
  case SatResult::Unknown:
    return "unknown";
  }
  return "?";
}

std::vector<SExpr> parse_sexprs(const std::string& text) {
  std::vector<SExpr> top;
  std::vector<SExpr> stack;
  std::size_t i = 0;
  auto emit = [&](SExpr e) {
    if (stack.empty())
      top.push_back(std::move(e));
    else
      stack.back().list.push_back(std::move(e));
  };
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == ';') {
      while (i < text.size() && text[i] != '\n')
        ++i;
    } else if (c == '(') {
      SExpr e;
      e.is_atom = false;
      stack.push_back(std::move(e));
      ++i;
    } else if (c == ')') {
      if (stack.empty())
        throw ModelError("unbalanced ')' in solver output");
      SExpr e = std::move(stack.back());
      stack.pop_back();
      emit(std::move(e));
      ++i;
    } else if (c == '"' || c == '|') {
      const char close = c;
      std::size_t j = i + 1;
      while (j < text.size() && text[j] != close)
        ++j;
      if (j >= text.size())
        throw ModelError("unterminated literal in solver output");
      emit({true, text.substr(i, j + 1 - i), {}});
      i = j + 1;
    } else {
      std::size_t j = i;
      while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) &&
             text[j] != '(' && text[j] != ')' && text[j] != ';')
        ++j;
      emit({true, text.substr(i, j - i), {}});
      i = j;
    }
  }
  if (!stack.empty())
    throw ModelError("unbalanced '(' in solver output");
  return top;
}

namespace {

unsigned parse_width(const SExpr& sort) {
  // (_ BitVec n)
  if (sort.is_atom || sort.list.size() != 3 || sort.list[0].atom != "_" ||
      sort.list[1].atom != "BitVec")
    return 0;
  return static_cast<unsigned>(std::stoul(sort.list[2].atom));
}

BitVec parse_literal(const SExpr& v, unsigned width) {
  std::uint64_t bits = 0;
  if (v.is_atom && v.atom.size() > 2 && v.atom[0] == '#' && (v.atom[1] == 'x' || v.atom[1] == 'b')) {
    const int base = v.atom[1] == 'x' ? 16 : 2;
    for (std::size_t k = 2; k < v.atom.size(); ++k) {
      const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(v.atom[k])));
      int d = -1;
      if (c >= '0' && c <= '9')
        d = c - '0';
      else if (base == 16 && c >= 'a' && c <= 'f')
        d = c - 'a' + 10;
      if (d < 0 || d >= base)
        throw ModelError("bad bitvector literal " + v.atom);
      bits = bits * static_cast<std::uint64_t>(base) + static_cast<std::uint64_t>(d);
    }
    return BitVec(width, bits);
  }
  // (_ bvK n)
  if (!v.is_atom && v.list.size() == 3 && v.list[0].atom == "_" && v.list[1].atom.rfind("bv", 0) == 0)
    return BitVec(width, std::stoull(v.list[1].atom.substr(2)));
  throw ModelError("unsupported model value");
}

} // namespace

Model parse_model(const std::string& text) {
  Model m;
  std::vector<SExpr> top;
  top = parse_sexprs(text);
  std::vector<const SExpr*> defs;
  for (const auto& t : top) {
    if (t.is_atom)
      throw ModelError("unexpected atom '" + t.atom + "' in model");
    // either the model list itself or, for older z3, (model ...)
    std::size_t k = 0;
    if (!t.list.empty() && t.list[0].is_atom && t.list[0].atom == "model")
      k = 1;
    if (!t.list.empty() && t.list[0].is_atom && t.list[0].atom == "define-fun") {
      defs.push_back(&t);
      continue;
    }
    for (; k < t.list.size(); ++k)
      defs.push_back(&t.list[k]);
  }
  for (const SExpr* d : defs) {
    if (d->is_atom || d->list.size() != 5 || d->list[0].atom != "define-fun")
      throw ModelError("unexpected entry in model");
    if (d->list[2].is_atom || !d->list[2].list.empty())
      continue; // functions with arguments
    if (d->list[1].atom.rfind("_t", 0) == 0)
      continue; // our own shared-subterm definitions
    const unsigned w = parse_width(d->list[3]);
    if (w == 0 || w > 64)
      continue; // arrays, booleans
    try {
      m[d->list[1].atom] = parse_literal(d->list[4], w);
    } catch (const std::invalid_argument&) {
      throw ModelError("bad value for " + d->list[1].atom);
    }
  }
  return m;
}

std::string default_solver_command() {
  if (const char* env = std::getenv("LODIN_SMT_CMD"); env && *env)
    return env;
  return "z3 -in";
}

Solver::Solver(SolverConfig cfg) : cfg_(std::move(cfg)) {
  std::signal(SIGPIPE, SIG_IGN);
}

Solver::~Solver() { stop(); }

bool Solver::start(std::string& err) {
  int in[2], out[2];
  if (pipe(in) != 0 || pipe(out) != 0) {
    err = std::string("pipe: ") + std::strerror(errno);
    return false;
  }
  const pid_t pid = fork();
  if (pid < 0) {
    err = std::string("fork: ") + std::strerror(errno);
    return false;
  }
  if (pid == 0) {
    dup2(in[0], 0);
    dup2(out[1], 1);
    dup2(out[1], 2);
    close(in[0]);
    close(in[1]);
    close(out[0]);
    close(out[1]);
    const std::string cmd = "exec " + cfg_.command;
    execl("/bin/sh", "sh", "-c", cmd.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  close(in[0]);
  close(out[1]);
  pid_ = pid;
  to_child_ = in[1];
  from_child_ = out[0];
  fcntl(from_child_, F_SETFD, FD_CLOEXEC);
  fcntl(to_child_, F_SETFD, FD_CLOEXEC);
  pending_.clear();
  return true;
}

void Solver::stop() {
  if (pid_ < 0)
    return;
  close(to_child_);
  close(from_child_);
  kill(pid_, SIGKILL);
  waitpid(pid_, nullptr, 0);
  pid_ = -1;
  to_child_ = from_child_ = -1;
}

bool Solver::exchange(const std::string& script, std::string& reply, std::string& err) {
  const auto deadline =
      std::chrono::steady_clock::now() + std::chrono::milliseconds(cfg_.timeout_ms + 2000);
  std::size_t off = 0;
  while (off < script.size()) {
    const ssize_t n = write(to_child_, script.data() + off, script.size() - off);
    if (n < 0) {
      if (errno == EINTR)
        continue;
      err = "solver closed its input: " + pending_;
      return false;
    }
    off += static_cast<std::size_t>(n);
  }
  const std::string marker = std::string(kMarker) + "\n";
  for (;;) {
    if (const auto pos = pending_.find(marker); pos != std::string::npos) {
      reply = pending_.substr(0, pos);
      pending_.erase(0, pos + marker.size());
      return true;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      err = "solver timed out after " + std::to_string(cfg_.timeout_ms) + " ms";
      return false;
    }
    pollfd pfd{from_child_, POLLIN, 0};
    const int r = poll(&pfd, 1, static_cast<int>(left.count()));
    if (r < 0 && errno == EINTR)
      continue;
    if (r <= 0)
      continue;
    char buf[4096];
    const ssize_t n = read(from_child_, buf, sizeof buf);
    if (n < 0 && errno == EINTR)
      continue;
    if (n <= 0) {
      err = "solver exited";
      if (!pending_.empty())
        err += ": " + pending_;
      return false;
    }
    pending_.append(buf, static_cast<std::size_t>(n));
  }
}

Verdict Solver::check(const Expr& formula, bool want_model) {
  const auto t0 = std::chrono::steady_clock::now();
  ++queries_;
  Verdict v;
  std::string script = to_smtlib(formula, want_model, cfg_.timeout_ms);
  script += "(echo \"" + std::string(kMarker) + "\")\n(reset)\n";
  std::string reply, err;
  if (pid_ < 0 && !start(err)) {
    v.diagnostic = err;
    return v;
  }
  if (!exchange(script, reply, err)) {
    stop();
    while (!err.empty() && std::isspace(static_cast<unsigned char>(err.back())))
      err.pop_back();
    v.diagnostic = err;
    spent_ += std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);
    return v;
  }
  spent_ += std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);

  // first atom is the verdict; anything else before it is a diagnostic
  std::size_t pos = 0;
  std::string first;
  while (pos < reply.size()) {
    const auto eol = reply.find('\n', pos);
    const std::string line = reply.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
    pos = eol == std::string::npos ? reply.size() : eol + 1;
    if (line == "sat" || line == "unsat" || line == "unknown") {
      first = line;
      break;
    }
    if (!line.empty())
      v.diagnostic += line + "\n";
  }
  if (first == "sat")
    v.result = SatResult::Sat;
  else if (first == "unsat")
    v.result = SatResult::Unsat;
  if (v.result == SatResult::Sat && want_model)
    v.model = parse_model(reply.substr(pos));
  else if (v.result == SatResult::Unknown && pos < reply.size())
    v.diagnostic += reply.substr(pos);
  if (first.empty() && v.diagnostic.empty())
    v.diagnostic = "solver gave no answer";
  while (!v.diagnostic.empty() && std::isspace(static_cast<unsigned char>(v.diagnostic.back())))
    v.diagnostic.pop_back();
  return v;
}

} // namespace lodin::smt
