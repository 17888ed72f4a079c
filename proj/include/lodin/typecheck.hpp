#pragma once

#include "lodin/ir.hpp"

#include <string>
#include <vector>

namespace lodin::ir {

struct TypeCheckError {
  std::string function;
  std::string block;
  int instr = -1; // index in block, -1 for function-level problems
  std::string rule; // Binary, Compare, Alloca, Load, Store, GEP, Return, Branch, Phi, Call, NonDet, Block, Function
  std::string message;
  SourcePos pos;

  std::string str() const;
};

/// Empty result means the module is well typed.
std::vector<TypeCheckError> type_check(const Module& m);

} // namespace lodin::ir
