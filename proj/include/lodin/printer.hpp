#pragma once

#include "lodin/ir.hpp"

#include <string>

namespace lodin::ir {

std::string print_operand(const Func& f, RegIdx r);
std::string print_instr(const Func& f, const Instr& in);
std::string print_function(const Module& m, const Func& f);
/// Canonical text; parse_module(print_module(m)) reproduces m.
std::string print_module(const Module& m);

} // namespace lodin::ir
