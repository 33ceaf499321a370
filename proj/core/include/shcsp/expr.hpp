#pragma once

#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "shcsp/rational.hpp"

namespace shcsp {

struct ExprNode;
struct BoolNode;
class BoolExpr;

enum class BinaryOp { Add, Sub, Mul, Div };
enum class CmpOp { Lt, Le, Eq, Ge, Gt };

// Pi is the only nullary entry; Min and Max take two arguments.
enum class Function { Sin, Cos, Exp, Sqrt, Abs, Sgn, Min, Max, Pi };

std::string_view function_name(Function fn);
std::size_t function_arity(Function fn);
bool lookup_function(std::string_view name, Function& out);
std::string_view cmp_symbol(CmpOp op);

/// Immutable arithmetic expression tree. Copies share structure.
class Expr {
 public:
  Expr();  // constant zero
  explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}

  static Expr constant(Rational value);
  static Expr constant(long value);
  static Expr variable(std::string name);
  static Expr negate(Expr operand);
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs);
  static Expr power(Expr base, unsigned exponent);
  static Expr call(Function fn, std::vector<Expr> args);
  static Expr pi();
  static Expr piecewise(std::vector<std::pair<BoolExpr, Expr>> branches, Expr otherwise);
  static Expr named(std::string name, Expr body);

  const ExprNode& node() const { return *node_; }
  const ExprNode* get() const { return node_.get(); }

  bool is_constant() const;
  bool is_constant(const Rational& value) const;

 private:
  std::shared_ptr<const ExprNode> node_;
};

/// Immutable boolean expression: guards, SDE domains, state predicates.
class BoolExpr {
 public:
  BoolExpr();  // true
  explicit BoolExpr(std::shared_ptr<const BoolNode> node) : node_(std::move(node)) {}

  static BoolExpr literal(bool value);
  static BoolExpr compare(Expr lhs, CmpOp op, Expr rhs);
  static BoolExpr negation(BoolExpr operand);
  static BoolExpr conjunction(BoolExpr lhs, BoolExpr rhs);
  static BoolExpr disjunction(BoolExpr lhs, BoolExpr rhs);

  const BoolNode& node() const { return *node_; }

 private:
  std::shared_ptr<const BoolNode> node_;
};

namespace ex {

struct Const {
  Rational value;
};
struct Var {
  std::string name;
};
struct Neg {
  Expr operand;
};
struct Binary {
  BinaryOp op;
  Expr lhs;
  Expr rhs;
};
struct Pow {
  Expr base;
  unsigned exponent;
};
struct Call {
  Function fn;
  std::vector<Expr> args;
};
struct Piecewise {
  std::vector<std::pair<BoolExpr, Expr>> branches;
  Expr otherwise;
};
/// A `def` binding: printed by name, evaluated and differentiated through its body.
struct Named {
  std::string name;
  Expr body;
};

struct BoolConst {
  bool value;
};
struct Compare {
  Expr lhs;
  CmpOp op;
  Expr rhs;
};
struct Not {
  BoolExpr operand;
};
struct And {
  BoolExpr lhs;
  BoolExpr rhs;
};
struct Or {
  BoolExpr lhs;
  BoolExpr rhs;
};

}  // namespace ex

struct ExprNode {
  std::variant<ex::Const, ex::Var, ex::Neg, ex::Binary, ex::Pow, ex::Call, ex::Piecewise, ex::Named> value;
};

struct BoolNode {
  std::variant<ex::BoolConst, ex::Compare, ex::Not, ex::And, ex::Or> value;
};

bool operator==(const Expr& a, const Expr& b);
bool operator==(const BoolExpr& a, const BoolExpr& b);

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

/// Variables read by the expression, looking through `def` bodies.
std::set<std::string> free_variables(const Expr& e);
std::set<std::string> free_variables(const BoolExpr& b);
void collect_variables(const Expr& e, std::set<std::string>& out);
void collect_variables(const BoolExpr& b, std::set<std::string>& out);

/// Replaces every occurrence of variable `name` (including inside `def` bodies).
Expr substitute(const Expr& e, const std::string& name, const Expr& replacement);
BoolExpr substitute(const BoolExpr& b, const std::string& name, const Expr& replacement);

/// Splits nested conjunctions into a flat list (a `true` literal yields nothing).
std::vector<BoolExpr> conjuncts(const BoolExpr& b);

/// Closure of the set a guard describes, for reporting: strict comparisons
/// become non-strict after pushing negations to the leaves.
BoolExpr closure(const BoolExpr& b);

}  // namespace shcsp
