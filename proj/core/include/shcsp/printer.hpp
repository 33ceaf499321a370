#pragma once

#include <string>

#include "shcsp/expr.hpp"
#include "shcsp/process.hpp"

namespace shcsp {

/// Program text that parses back to `p`, preceded by a `def` line for every
/// named subexpression it uses.
std::string pretty(const Process& p);

/// Minimal-parenthesis rendering; `def` bindings print by name.
std::string to_string(const Expr& e);
std::string to_string(const BoolExpr& b);
std::string to_string(const SdeBlock& block);

/// Decimal when terminating, otherwise `n/d`.
std::string rational_literal(const Rational& r);

}  // namespace shcsp
