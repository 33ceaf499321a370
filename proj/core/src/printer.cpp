#include "shcsp/printer.hpp"

#include <set>

namespace shcsp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// 0 piecewise, 1 additive, 2 multiplicative, 3 unary, 4 power, 5 atom
int precedence(const Expr& e) {
  return std::visit(overloaded{
                        [](const ex::Const& c) {
                          if (!is_terminating_decimal(c.value)) return 5;
                          return c.value < 0 ? 3 : 5;
                        },
                        [](const ex::Neg&) { return 3; },
                        [](const ex::Binary& b) { return (b.op == BinaryOp::Add || b.op == BinaryOp::Sub) ? 1 : 2; },
                        [](const ex::Pow&) { return 4; },
                        [](const ex::Piecewise&) { return 0; },
                        [](const auto&) { return 5; },
                    },
                    e.node().value);
}

void print(const Expr& e, int ctx, std::string& out);
void print(const BoolExpr& b, int ctx, std::string& out);

void print_const(const Rational& v, std::string& out) {
  if (is_terminating_decimal(v)) {
    out += to_decimal_string(v);
  } else {
    out += "(" + rational_literal(v) + ")";
  }
}

void print(const Expr& e, int ctx, std::string& out) {
  const bool parens = precedence(e) < ctx;
  if (parens) out += "(";
  std::visit(overloaded{
                 [&](const ex::Const& c) { print_const(c.value, out); },
                 [&](const ex::Var& v) { out += v.name; },
                 [&](const ex::Named& n) { out += n.name; },
                 [&](const ex::Neg& n) {
                   out += "-";
                   // a bare literal after '-' would read back as a negative constant
                   if (n.operand.is_constant()) {
                     out += "(";
                     print(n.operand, 0, out);
                     out += ")";
                   } else {
                     print(n.operand, 3, out);
                   }
                 },
                 [&](const ex::Binary& b) {
                   switch (b.op) {
                     case BinaryOp::Add:
                     case BinaryOp::Sub:
                       print(b.lhs, 1, out);
                       out += b.op == BinaryOp::Add ? " + " : " - ";
                       print(b.rhs, 2, out);
                       break;
                     case BinaryOp::Mul:
                     case BinaryOp::Div:
                       print(b.lhs, 2, out);
                       out += b.op == BinaryOp::Mul ? "*" : "/";
                       print(b.rhs, 3, out);
                       break;
                   }
                 },
                 [&](const ex::Pow& p) {
                   print(p.base, 5, out);
                   out += "^" + std::to_string(p.exponent);
                 },
                 [&](const ex::Call& c) {
                   out += function_name(c.fn);
                   if (c.fn == Function::Pi) return;
                   out += "(";
                   for (std::size_t i = 0; i < c.args.size(); ++i) {
                     if (i) out += ", ";
                     print(c.args[i], 0, out);
                   }
                   out += ")";
                 },
                 [&](const ex::Piecewise& p) {
                   for (std::size_t i = 0; i < p.branches.size(); ++i) {
                     out += i == 0 ? "if " : " elif ";
                     print(p.branches[i].first, 0, out);
                     out += " then ";
                     print(p.branches[i].second, 0, out);
                   }
                   out += " else ";
                   print(p.otherwise, 0, out);
                 },
             },
             e.node().value);
  if (parens) out += ")";
}

// contexts: 0 top or or-lhs, 1 or-rhs or and-lhs, 2 and-rhs, 3 under negation
void print(const BoolExpr& b, int ctx, std::string& out) {
  std::visit(overloaded{
                 [&](const ex::BoolConst& c) { out += c.value ? "true" : "false"; },
                 [&](const ex::Compare& c) {
                   const bool parens = ctx > 2;
                   if (parens) out += "(";
                   print(c.lhs, 1, out);
                   out += " ";
                   out += cmp_symbol(c.op);
                   out += " ";
                   print(c.rhs, 1, out);
                   if (parens) out += ")";
                 },
                 [&](const ex::Not& n) {
                   out += "!";
                   print(n.operand, 3, out);
                 },
                 [&](const ex::And& a) {
                   const bool parens = ctx > 1;
                   if (parens) out += "(";
                   print(a.lhs, 1, out);
                   out += " & ";
                   print(a.rhs, 2, out);
                   if (parens) out += ")";
                 },
                 [&](const ex::Or& o) {
                   const bool parens = ctx > 0;
                   if (parens) out += "(";
                   print(o.lhs, 0, out);
                   out += " | ";
                   print(o.rhs, 1, out);
                   if (parens) out += ")";
                 },
             },
             b.node().value);
}

bool is_identity(const std::vector<std::vector<Expr>>& m) {
  if (m.size() < 2 || m.front().size() != m.size()) return false;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (!m[i][j].is_constant(Rational(i == j ? 1 : 0))) return false;
    }
  }
  return true;
}

void print_list(const std::vector<Expr>& items, std::string& out) {
  out += "[";
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    print(items[i], 0, out);
  }
  out += "]";
}

void print_drift(const std::vector<Expr>& drift, std::string& out) {
  if (drift.size() == 1) {
    print(drift.front(), 0, out);
    return;
  }
  // v*[a, b] reads back as component-wise products sharing the scale
  const ex::Binary* first = std::get_if<ex::Binary>(&drift.front().node().value);
  bool shared = first != nullptr && first->op == BinaryOp::Mul;
  for (const Expr& e : drift) {
    const ex::Binary* b = shared ? std::get_if<ex::Binary>(&e.node().value) : nullptr;
    if (b == nullptr || b->op != BinaryOp::Mul || !(b->lhs == first->lhs)) shared = false;
  }
  if (!shared) {
    print_list(drift, out);
    return;
  }
  print(first->lhs, 2, out);
  out += "*";
  std::vector<Expr> rest;
  for (const Expr& e : drift) rest.push_back(std::get<ex::Binary>(e.node().value).rhs);
  print_list(rest, out);
}

void print_block(const SdeBlock& block, std::string& out) {
  out += "{d[";
  for (std::size_t i = 0; i < block.vars.size(); ++i) {
    if (i) out += ", ";
    out += block.vars[i];
  }
  out += "] = ";
  print_drift(block.drift, out);
  out += " dt + ";
  const auto& m = block.diffusion;
  if (is_identity(m)) {
    out += "I" + std::to_string(m.size());
  } else if (m.size() == 1 && m.front().size() == 1) {
    print(m.front().front(), 0, out);
  } else if (m.front().size() == 1) {
    std::vector<Expr> col;
    for (const auto& row : m) col.push_back(row.front());
    print_list(col, out);
  } else {
    out += "[";
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (i) out += ", ";
      print_list(m[i], out);
    }
    out += "]";
  }
  out += " dW & ";
  print(block.domain, 0, out);
  out += "}";
}

void print_event(const CommEvent& ev, std::string& out) {
  out += ev.chan;
  if (ev.direction == Direction::Input) {
    out += "?" + ev.var;
  } else {
    out += "!";
    print(ev.value, 0, out);
  }
}

// 0 parallel, 1 sequence, 2 unit
void print(const Process& p, int ctx, std::string& out) {
  auto wrap = [&](int level, auto&& body) {
    const bool braces = level < ctx;
    if (braces) out += "{";
    body();
    if (braces) out += "}";
  };
  std::visit(overloaded{
                 [&](const proc::Skip&) { out += "skip"; },
                 [&](const proc::Assign& a) {
                   out += a.var + " := ";
                   print(a.value, 0, out);
                 },
                 [&](const proc::Input& i) { out += i.chan + "?" + i.var; },
                 [&](const proc::Output& o) {
                   out += o.chan + "!";
                   print(o.value, 0, out);
                 },
                 [&](const proc::Seq& s) {
                   wrap(1, [&] {
                     print(s.first, 2, out);
                     out += "; ";
                     print(s.second, 1, out);
                   });
                 },
                 [&](const proc::Parallel& s) {
                   wrap(0, [&] {
                     print(s.left, 1, out);
                     out += " || ";
                     print(s.right, 0, out);
                   });
                 },
                 [&](const proc::Cond& c) {
                   print(c.guard, 0, out);
                   out += " -> {";
                   print(c.body, 0, out);
                   out += "}";
                 },
                 [&](const proc::Repeat& r) {
                   out += "{";
                   print(r.body, 0, out);
                   out += "}*";
                 },
                 [&](const proc::PChoice& c) {
                   out += "(";
                   print(c.left, 0, out);
                   out += " |" + rational_literal(c.prob) + "| ";
                   print(c.right, 0, out);
                   out += ")";
                 },
                 [&](const proc::Sde& s) { print_block(s.block, out); },
                 [&](const proc::Interrupt& i) {
                   print_block(i.block, out);
                   out += " |> [";
                   for (std::size_t k = 0; k < i.branches.size(); ++k) {
                     if (k) out += ", ";
                     out += rational_literal(i.branches[k].weight) + ": ";
                     print_event(i.branches[k].event, out);
                     out += " -> {";
                     print(i.branches[k].body, 0, out);
                     out += "}";
                   }
                   out += "]";
                 },
             },
             p.node().value);
}

// ---- def collection, dependencies before users ----

struct DefCollector {
  std::set<std::string> seen;
  std::vector<const ex::Named*> order;

  void visit(const Expr& e) {
    std::visit(overloaded{
                   [&](const ex::Named& n) {
                     if (seen.count(n.name)) return;
                     visit(n.body);
                     seen.insert(n.name);
                     order.push_back(&n);
                   },
                   [&](const ex::Neg& n) { visit(n.operand); },
                   [&](const ex::Binary& b) {
                     visit(b.lhs);
                     visit(b.rhs);
                   },
                   [&](const ex::Pow& p) { visit(p.base); },
                   [&](const ex::Call& c) {
                     for (const auto& a : c.args) visit(a);
                   },
                   [&](const ex::Piecewise& p) {
                     for (const auto& [g, v] : p.branches) {
                       visit(g);
                       visit(v);
                     }
                     visit(p.otherwise);
                   },
                   [](const auto&) {},
               },
               e.node().value);
  }

  void visit(const BoolExpr& b) {
    std::visit(overloaded{
                   [&](const ex::Compare& c) {
                     visit(c.lhs);
                     visit(c.rhs);
                   },
                   [&](const ex::Not& n) { visit(n.operand); },
                   [&](const ex::And& a) {
                     visit(a.lhs);
                     visit(a.rhs);
                   },
                   [&](const ex::Or& o) {
                     visit(o.lhs);
                     visit(o.rhs);
                   },
                   [](const ex::BoolConst&) {},
               },
               b.node().value);
  }

  void visit(const SdeBlock& block) {
    for (const auto& e : block.drift) visit(e);
    for (const auto& row : block.diffusion) {
      for (const auto& e : row) visit(e);
    }
    visit(block.domain);
  }

  void visit(const Process& p) {
    std::visit(overloaded{
                   [&](const proc::Assign& a) { visit(a.value); },
                   [&](const proc::Output& o) { visit(o.value); },
                   [&](const proc::Seq& s) {
                     visit(s.first);
                     visit(s.second);
                   },
                   [&](const proc::Parallel& s) {
                     visit(s.left);
                     visit(s.right);
                   },
                   [&](const proc::Cond& c) {
                     visit(c.guard);
                     visit(c.body);
                   },
                   [&](const proc::Repeat& r) { visit(r.body); },
                   [&](const proc::PChoice& c) {
                     visit(c.left);
                     visit(c.right);
                   },
                   [&](const proc::Sde& s) { visit(s.block); },
                   [&](const proc::Interrupt& i) {
                     visit(i.block);
                     for (const auto& b : i.branches) {
                       if (b.event.direction == Direction::Output) visit(b.event.value);
                       visit(b.body);
                     }
                   },
                   [](const auto&) {},
               },
               p.node().value);
  }
};

}  // namespace

std::string rational_literal(const Rational& r) {
  if (is_terminating_decimal(r)) return to_decimal_string(r);
  return numerator(r).str() + "/" + denominator(r).str();
}

std::string to_string(const Expr& e) {
  std::string out;
  print(e, 0, out);
  return out;
}

std::string to_string(const BoolExpr& b) {
  std::string out;
  print(b, 0, out);
  return out;
}

std::string to_string(const SdeBlock& block) {
  std::string out;
  print_block(block, out);
  return out;
}

std::string pretty(const Process& p) {
  DefCollector defs;
  defs.visit(p);
  std::string out;
  for (const ex::Named* n : defs.order) {
    out += "def " + n->name + " = ";
    print(n->body, 0, out);
    out += ";\n";
  }
  print(p, 0, out);
  return out;
}

}  // namespace shcsp
