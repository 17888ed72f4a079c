#pragma once

#include "lodin/engine.hpp"
#include "lodin/explicit_context.hpp"

#include <cstdint>
#include <algorithm>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lodin::props {

struct QueryType {
  bool is_signed = false;
  unsigned bits = 32;

  std::string str() const { return (is_signed ? "si" : "ui") + std::to_string(bits); }
  friend bool operator==(const QueryType&, const QueryType&) = default;
};

struct Comparand {
  bool is_register = false;
  std::uint64_t number = 0; // already encoded at type.bits
  int proc = 0;
  std::string func;
  std::string reg; // "%x"
  QueryType type;

  std::string str() const;
};

enum class CmpOp : std::uint8_t { Eq, Ne, Lt, Le, Gt, Ge };

struct Prop {
  enum class Kind : std::uint8_t { True, False, Compare, DataRace, DivZero, Overflows, CallSite, And, Or, Not };
  Kind kind = Kind::True;
  CmpOp op = CmpOp::Eq;
  Comparand lhs, rhs;
  int proc = 0;      // CallSite
  std::string func;  // CallSite
  std::shared_ptr<const Prop> a, b;

  std::string str() const;
};

using PropPtr = std::shared_ptr<const Prop>;

PropPtr make_true();
PropPtr make_not(PropPtr p);
PropPtr make_and(PropPtr a, PropPtr b);
PropPtr make_or(PropPtr a, PropPtr b);
PropPtr make_atom(Prop::Kind k);
PropPtr make_callsite(int proc, std::string func);
PropPtr make_compare(Comparand l, CmpOp op, Comparand r);

struct Query {
  enum class Kind : std::uint8_t { EReach, PrEstimate, PrTest, EnumStates, EnumStatesSMC };
  Kind kind = Kind::EReach;
  PropPtr prop;
  std::uint64_t step_bound = 0;
  std::uint64_t runs = 0;
  double alpha = 0.05;
  double epsilon = 0.01;
  double theta = 0.0;
  double beta = 0.05;
  double delta = 0.01;
  std::string text;
};

class QueryParseError : public std::runtime_error {
public:
  QueryParseError(std::size_t col, const std::string& msg)
      : std::runtime_error("column " + std::to_string(col) + ": " + msg), col_(col) {}
  std::size_t col() const { return col_; }

private:
  std::size_t col_;
};

Query parse_query(std::string_view text);
PropPtr parse_prop(std::string_view text);

/// Whether the proposition only uses call-site atoms (the symbolic engine's subset).
bool callsite_only(const Prop& p);

/// Evaluates propositions on explicit network states.
class Evaluator {
public:
  using Eng = Engine<ExplicitContext>;
  explicit Evaluator(const Eng& e) : eng_(e) {}

  bool eval(const Prop& p, const Eng::State& s) const;
  bool data_race(const Eng::State& s) const;
  bool div_zero(const Eng::State& s) const;
  bool overflows(const Eng::State& s) const;
  bool call_site(const Eng::State& s, int proc, const std::string& func) const;
  /// Value of a comparand encoded at its query width; missing registers read 0.
  std::uint64_t read(const Comparand& c, const Eng::State& s) const;

  struct Access {
    std::uint32_t block;
    std::uint64_t offset;
    std::uint64_t len;
    bool write;
  };
  /// Memory access about to be made by process p, if its next instruction is a load or store.
  std::optional<Access> pending_access(const Eng::State& s, std::size_t p) const;

private:
  const Eng& eng_;
};

/// Half-open byte ranges [o1, o1+n1) and [o2, o2+n2) intersect.
inline bool ranges_overlap(std::uint64_t o1, std::uint64_t n1, std::uint64_t o2, std::uint64_t n2) {
  return std::max(o1, o2) < std::min(o1 + n1, o2 + n2);
}

} // namespace lodin::props
