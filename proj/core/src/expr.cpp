#include "shcsp/expr.hpp"

#include <array>
#include <stdexcept>

namespace shcsp {

namespace {

struct FunctionInfo {
  Function fn;
  std::string_view name;
  std::size_t arity;
};

constexpr std::array<FunctionInfo, 9> kFunctions{{
    {Function::Sin, "sin", 1},
    {Function::Cos, "cos", 1},
    {Function::Exp, "exp", 1},
    {Function::Sqrt, "sqrt", 1},
    {Function::Abs, "abs", 1},
    {Function::Sgn, "sgn", 1},
    {Function::Min, "min", 2},
    {Function::Max, "max", 2},
    {Function::Pi, "pi", 0},
}};

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Expr make(ExprNode node) { return Expr(std::make_shared<const ExprNode>(std::move(node))); }
BoolExpr make(BoolNode node) { return BoolExpr(std::make_shared<const BoolNode>(std::move(node))); }

}  // namespace

std::string_view function_name(Function fn) { return kFunctions[static_cast<std::size_t>(fn)].name; }
std::size_t function_arity(Function fn) { return kFunctions[static_cast<std::size_t>(fn)].arity; }

bool lookup_function(std::string_view name, Function& out) {
  for (const auto& info : kFunctions) {
    if (info.name == name) {
      out = info.fn;
      return true;
    }
  }
  return false;
}

std::string_view cmp_symbol(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Eq: return "=";
    case CmpOp::Ge: return ">=";
    case CmpOp::Gt: return ">";
  }
  return "?";
}

Expr::Expr() : Expr(constant(Rational(0))) {}

Expr Expr::constant(Rational value) { return make(ExprNode{ex::Const{std::move(value)}}); }
Expr Expr::constant(long value) { return constant(Rational(value)); }
Expr Expr::variable(std::string name) { return make(ExprNode{ex::Var{std::move(name)}}); }
Expr Expr::negate(Expr operand) { return make(ExprNode{ex::Neg{std::move(operand)}}); }
Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs) {
  return make(ExprNode{ex::Binary{op, std::move(lhs), std::move(rhs)}});
}
Expr Expr::power(Expr base, unsigned exponent) { return make(ExprNode{ex::Pow{std::move(base), exponent}}); }
Expr Expr::call(Function fn, std::vector<Expr> args) {
  if (args.size() != function_arity(fn)) {
    throw std::invalid_argument(std::string(function_name(fn)) + " expects " +
                                std::to_string(function_arity(fn)) + " argument(s)");
  }
  return make(ExprNode{ex::Call{fn, std::move(args)}});
}
Expr Expr::pi() { return call(Function::Pi, {}); }
Expr Expr::piecewise(std::vector<std::pair<BoolExpr, Expr>> branches, Expr otherwise) {
  return make(ExprNode{ex::Piecewise{std::move(branches), std::move(otherwise)}});
}
Expr Expr::named(std::string name, Expr body) { return make(ExprNode{ex::Named{std::move(name), std::move(body)}}); }

bool Expr::is_constant() const { return std::holds_alternative<ex::Const>(node_->value); }
bool Expr::is_constant(const Rational& value) const {
  const auto* c = std::get_if<ex::Const>(&node_->value);
  return c != nullptr && c->value == value;
}

BoolExpr::BoolExpr() : BoolExpr(literal(true)) {}
BoolExpr BoolExpr::literal(bool value) { return make(BoolNode{ex::BoolConst{value}}); }
BoolExpr BoolExpr::compare(Expr lhs, CmpOp op, Expr rhs) {
  return make(BoolNode{ex::Compare{std::move(lhs), op, std::move(rhs)}});
}
BoolExpr BoolExpr::negation(BoolExpr operand) { return make(BoolNode{ex::Not{std::move(operand)}}); }
BoolExpr BoolExpr::conjunction(BoolExpr lhs, BoolExpr rhs) {
  return make(BoolNode{ex::And{std::move(lhs), std::move(rhs)}});
}
BoolExpr BoolExpr::disjunction(BoolExpr lhs, BoolExpr rhs) {
  return make(BoolNode{ex::Or{std::move(lhs), std::move(rhs)}});
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.get() == b.get()) return true;
  const auto& x = a.node().value;
  const auto& y = b.node().value;
  if (x.index() != y.index()) return false;
  return std::visit(
      overloaded{
          [&](const ex::Const& c) { return c.value == std::get<ex::Const>(y).value; },
          [&](const ex::Var& v) { return v.name == std::get<ex::Var>(y).name; },
          [&](const ex::Neg& n) { return n.operand == std::get<ex::Neg>(y).operand; },
          [&](const ex::Binary& n) {
            const auto& o = std::get<ex::Binary>(y);
            return n.op == o.op && n.lhs == o.lhs && n.rhs == o.rhs;
          },
          [&](const ex::Pow& n) {
            const auto& o = std::get<ex::Pow>(y);
            return n.exponent == o.exponent && n.base == o.base;
          },
          [&](const ex::Call& n) {
            const auto& o = std::get<ex::Call>(y);
            return n.fn == o.fn && n.args == o.args;
          },
          [&](const ex::Piecewise& n) {
            const auto& o = std::get<ex::Piecewise>(y);
            return n.branches == o.branches && n.otherwise == o.otherwise;
          },
          [&](const ex::Named& n) {
            const auto& o = std::get<ex::Named>(y);
            return n.name == o.name && n.body == o.body;
          },
      },
      x);
}

bool operator==(const BoolExpr& a, const BoolExpr& b) {
  const auto& x = a.node().value;
  const auto& y = b.node().value;
  if (x.index() != y.index()) return false;
  return std::visit(
      overloaded{
          [&](const ex::BoolConst& c) { return c.value == std::get<ex::BoolConst>(y).value; },
          [&](const ex::Compare& c) {
            const auto& o = std::get<ex::Compare>(y);
            return c.op == o.op && c.lhs == o.lhs && c.rhs == o.rhs;
          },
          [&](const ex::Not& n) { return n.operand == std::get<ex::Not>(y).operand; },
          [&](const ex::And& n) {
            const auto& o = std::get<ex::And>(y);
            return n.lhs == o.lhs && n.rhs == o.rhs;
          },
          [&](const ex::Or& n) {
            const auto& o = std::get<ex::Or>(y);
            return n.lhs == o.lhs && n.rhs == o.rhs;
          },
      },
      x);
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(BinaryOp::Add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(BinaryOp::Sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(BinaryOp::Mul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(BinaryOp::Div, a, b); }
Expr operator-(const Expr& a) { return Expr::negate(a); }

void collect_variables(const Expr& e, std::set<std::string>& out) {
  std::visit(overloaded{
                 [](const ex::Const&) {},
                 [&](const ex::Var& v) { out.insert(v.name); },
                 [&](const ex::Neg& n) { collect_variables(n.operand, out); },
                 [&](const ex::Binary& n) {
                   collect_variables(n.lhs, out);
                   collect_variables(n.rhs, out);
                 },
                 [&](const ex::Pow& n) { collect_variables(n.base, out); },
                 [&](const ex::Call& n) {
                   for (const auto& a : n.args) collect_variables(a, out);
                 },
                 [&](const ex::Piecewise& n) {
                   for (const auto& [g, b] : n.branches) {
                     collect_variables(g, out);
                     collect_variables(b, out);
                   }
                   collect_variables(n.otherwise, out);
                 },
                 [&](const ex::Named& n) { collect_variables(n.body, out); },
             },
             e.node().value);
}

void collect_variables(const BoolExpr& b, std::set<std::string>& out) {
  std::visit(overloaded{
                 [](const ex::BoolConst&) {},
                 [&](const ex::Compare& c) {
                   collect_variables(c.lhs, out);
                   collect_variables(c.rhs, out);
                 },
                 [&](const ex::Not& n) { collect_variables(n.operand, out); },
                 [&](const ex::And& n) {
                   collect_variables(n.lhs, out);
                   collect_variables(n.rhs, out);
                 },
                 [&](const ex::Or& n) {
                   collect_variables(n.lhs, out);
                   collect_variables(n.rhs, out);
                 },
             },
             b.node().value);
}

std::set<std::string> free_variables(const Expr& e) {
  std::set<std::string> out;
  collect_variables(e, out);
  return out;
}

std::set<std::string> free_variables(const BoolExpr& b) {
  std::set<std::string> out;
  collect_variables(b, out);
  return out;
}

Expr substitute(const Expr& e, const std::string& name, const Expr& replacement) {
  return std::visit(
      overloaded{
          [&](const ex::Const&) { return e; },
          [&](const ex::Var& v) { return v.name == name ? replacement : e; },
          [&](const ex::Neg& n) { return Expr::negate(substitute(n.operand, name, replacement)); },
          [&](const ex::Binary& n) {
            return Expr::binary(n.op, substitute(n.lhs, name, replacement), substitute(n.rhs, name, replacement));
          },
          [&](const ex::Pow& n) { return Expr::power(substitute(n.base, name, replacement), n.exponent); },
          [&](const ex::Call& n) {
            std::vector<Expr> args;
            for (const auto& a : n.args) args.push_back(substitute(a, name, replacement));
            return Expr::call(n.fn, std::move(args));
          },
          [&](const ex::Piecewise& n) {
            std::vector<std::pair<BoolExpr, Expr>> branches;
            for (const auto& [g, b] : n.branches) {
              branches.emplace_back(substitute(g, name, replacement), substitute(b, name, replacement));
            }
            return Expr::piecewise(std::move(branches), substitute(n.otherwise, name, replacement));
          },
          [&](const ex::Named& n) {
            if (free_variables(n.body).count(name) == 0) return e;
            return Expr::named(n.name, substitute(n.body, name, replacement));
          },
      },
      e.node().value);
}

BoolExpr substitute(const BoolExpr& b, const std::string& name, const Expr& replacement) {
  return std::visit(
      overloaded{
          [&](const ex::BoolConst&) { return b; },
          [&](const ex::Compare& c) {
            return BoolExpr::compare(substitute(c.lhs, name, replacement), c.op, substitute(c.rhs, name, replacement));
          },
          [&](const ex::Not& n) { return BoolExpr::negation(substitute(n.operand, name, replacement)); },
          [&](const ex::And& n) {
            return BoolExpr::conjunction(substitute(n.lhs, name, replacement), substitute(n.rhs, name, replacement));
          },
          [&](const ex::Or& n) {
            return BoolExpr::disjunction(substitute(n.lhs, name, replacement), substitute(n.rhs, name, replacement));
          },
      },
      b.node().value);
}

std::vector<BoolExpr> conjuncts(const BoolExpr& b) {
  std::vector<BoolExpr> out;
  if (const auto* a = std::get_if<ex::And>(&b.node().value)) {
    for (auto& c : conjuncts(a->lhs)) out.push_back(std::move(c));
    for (auto& c : conjuncts(a->rhs)) out.push_back(std::move(c));
  } else if (const auto* c = std::get_if<ex::BoolConst>(&b.node().value); c != nullptr && c->value) {
    // true contributes nothing
  } else {
    out.push_back(b);
  }
  return out;
}

namespace {

CmpOp negate_cmp(CmpOp op, bool& needs_not) {
  needs_not = false;
  switch (op) {
    case CmpOp::Lt: return CmpOp::Ge;
    case CmpOp::Le: return CmpOp::Gt;
    case CmpOp::Ge: return CmpOp::Lt;
    case CmpOp::Gt: return CmpOp::Le;
    case CmpOp::Eq: needs_not = true; return CmpOp::Eq;
  }
  return op;
}

BoolExpr closure_nnf(const BoolExpr& b, bool negated) {
  return std::visit(
      overloaded{
          [&](const ex::BoolConst& c) { return BoolExpr::literal(c.value != negated); },
          [&](const ex::Compare& c) {
            CmpOp op = c.op;
            if (negated) {
              bool needs_not = false;
              op = negate_cmp(op, needs_not);
              // cl(x != a) is the whole line
              if (needs_not) return BoolExpr::literal(true);
            }
            if (op == CmpOp::Lt) op = CmpOp::Le;
            if (op == CmpOp::Gt) op = CmpOp::Ge;
            return BoolExpr::compare(c.lhs, op, c.rhs);
          },
          [&](const ex::Not& n) { return closure_nnf(n.operand, !negated); },
          [&](const ex::And& n) {
            auto l = closure_nnf(n.lhs, negated);
            auto r = closure_nnf(n.rhs, negated);
            return negated ? BoolExpr::disjunction(l, r) : BoolExpr::conjunction(l, r);
          },
          [&](const ex::Or& n) {
            auto l = closure_nnf(n.lhs, negated);
            auto r = closure_nnf(n.rhs, negated);
            return negated ? BoolExpr::conjunction(l, r) : BoolExpr::disjunction(l, r);
          },
      },
      b.node().value);
}

}  // namespace

BoolExpr closure(const BoolExpr& b) { return closure_nnf(b, false); }

}  // namespace shcsp
