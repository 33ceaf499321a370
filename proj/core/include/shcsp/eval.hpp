#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "shcsp/expr.hpp"

namespace shcsp {

/// Expression evaluation failure: division by zero, unbound variable,
/// non-finite intermediate.
class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sorted variable names mapped to dense slot indices.
class SymbolTable {
 public:
  SymbolTable() = default;
  explicit SymbolTable(std::vector<std::string> names);

  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index(std::string_view name) const;  // throws EvalError
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
};

struct Code;

/// Stack-machine form of an expression bound to a symbol table. Slots
/// holding NaN are treated as unbound.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  explicit CompiledExpr(std::shared_ptr<const Code> code) : code_(std::move(code)) {}
  double operator()(const double* slots) const;

 private:
  std::shared_ptr<const Code> code_;
};

class CompiledBool {
 public:
  CompiledBool() = default;
  explicit CompiledBool(std::shared_ptr<const Code> code) : code_(std::move(code)) {}
  bool operator()(const double* slots) const;

 private:
  std::shared_ptr<const Code> code_;
};

CompiledExpr compile(const Expr& e, const SymbolTable& table);
CompiledBool compile(const BoolExpr& b, const SymbolTable& table);

using Valuation = std::map<std::string, double>;

double evaluate(const Expr& e, const Valuation& env);
bool evaluate(const BoolExpr& b, const Valuation& env);

/// Exact evaluation over rationals; nullopt when a transcendental function
/// (sin, cos, exp, sqrt, pi) is reached.
std::optional<Rational> evaluate_exact(const Expr& e, const std::map<std::string, Rational>& env);
std::optional<bool> evaluate_exact(const BoolExpr& b, const std::map<std::string, Rational>& env);

/// True when the expression mentions sin, cos, exp, sqrt or pi.
bool has_transcendental(const Expr& e);

}  // namespace shcsp
