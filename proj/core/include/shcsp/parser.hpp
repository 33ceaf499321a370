#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "shcsp/expr.hpp"
#include "shcsp/process.hpp"

namespace shcsp {

/// Syntax error with a 1-based source position.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int line, int column)
      : std::runtime_error(message), line_(line), column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Parses a program: optional `def name = expr;` lines followed by a process.
Process parse(std::string_view text);

/// Parses a standalone arithmetic expression. `defs` may be a program text
/// whose `def` lines become available by name (the process part may be empty).
Expr parse_expr(std::string_view text, std::string_view defs = {});
BoolExpr parse_bool_expr(std::string_view text, std::string_view defs = {});

/// First SDE block of a program (plain or interrupt body); throws when none.
SdeBlock first_sde_block(const Process& p);

}  // namespace shcsp
