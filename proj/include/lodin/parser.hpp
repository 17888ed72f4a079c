#pragma once

#include "lodin/ir.hpp"

#include <stdexcept>
#include <string>
#include <string_view>

namespace lodin::ir {

class ParseError : public std::runtime_error {
public:
  ParseError(int line, int col, const std::string& msg)
      : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": error: " + msg),
        line_(line), col_(col), msg_(msg) {}

  int line() const { return line_; }
  int col() const { return col_; }
  const std::string& message() const { return msg_; }

private:
  int line_;
  int col_;
  std::string msg_;
};

/// Parses the textual IR subset. Entry points are left empty; callers pick
/// them with Module::set_entry_points.
Module parse_module(std::string_view text);

} // namespace lodin::ir
