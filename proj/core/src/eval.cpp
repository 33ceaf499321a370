#include "shcsp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace shcsp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

enum class Op : std::uint8_t {
  Const,
  Load,
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Sin,
  Cos,
  Exp,
  Sqrt,
  Abs,
  Sgn,
  Min,
  Max,
  Cmp,
  Not,
  JumpIfFalse,      // pops the condition
  JumpIfFalseKeep,  // keeps 0 on jump, pops otherwise
  JumpIfTrueKeep,
  Jump,
};

struct Instr {
  Op op;
  std::uint32_t arg = 0;
  double k = 0.0;
};

}  // namespace

struct Code {
  std::vector<Instr> instrs;
  std::vector<std::string> names;  // slot names for diagnostics
  std::size_t max_stack = 0;
};

namespace {

class Compiler {
 public:
  explicit Compiler(const SymbolTable& table) : table_(table) { code_.names = table.names(); }

  void expr(const Expr& e) {
    std::visit(overloaded{
                   [&](const ex::Const& c) { emit({Op::Const, 0, to_double(c.value)}, +1); },
                   [&](const ex::Var& v) {
                     auto slot = table_.find(v.name);
                     if (!slot) throw EvalError("unbound variable " + v.name);
                     emit({Op::Load, static_cast<std::uint32_t>(*slot)}, +1);
                   },
                   [&](const ex::Named& n) { expr(n.body); },
                   [&](const ex::Neg& n) {
                     expr(n.operand);
                     emit({Op::Neg}, 0);
                   },
                   [&](const ex::Binary& b) {
                     expr(b.lhs);
                     expr(b.rhs);
                     static constexpr Op ops[] = {Op::Add, Op::Sub, Op::Mul, Op::Div};
                     emit({ops[static_cast<int>(b.op)]}, -1);
                   },
                   [&](const ex::Pow& p) {
                     expr(p.base);
                     emit({Op::Pow, p.exponent}, 0);
                   },
                   [&](const ex::Call& c) {
                     if (c.fn == Function::Pi) {
                       emit({Op::Const, 0, std::numbers::pi}, +1);
                       return;
                     }
                     for (const auto& a : c.args) expr(a);
                     static constexpr Op ops[] = {Op::Sin, Op::Cos, Op::Exp, Op::Sqrt,
                                                  Op::Abs, Op::Sgn, Op::Min, Op::Max};
                     emit({ops[static_cast<int>(c.fn)]}, c.args.size() == 2 ? -1 : 0);
                   },
                   [&](const ex::Piecewise& p) {
                     std::vector<std::size_t> to_end;
                     for (const auto& [guard, value] : p.branches) {
                       boolean(guard);
                       std::size_t skip = emit({Op::JumpIfFalse}, -1);
                       expr(value);
                       to_end.push_back(emit({Op::Jump}, 0));
                       depth_ -= 1;  // the branch value is not on the stack of the next arm
                       patch(skip);
                     }
                     expr(p.otherwise);
                     for (std::size_t j : to_end) patch(j);
                   },
               },
               e.node().value);
  }

  void boolean(const BoolExpr& b) {
    std::visit(overloaded{
                   [&](const ex::BoolConst& c) { emit({Op::Const, 0, c.value ? 1.0 : 0.0}, +1); },
                   [&](const ex::Compare& c) {
                     expr(c.lhs);
                     expr(c.rhs);
                     emit({Op::Cmp, static_cast<std::uint32_t>(c.op)}, -1);
                   },
                   [&](const ex::Not& n) {
                     boolean(n.operand);
                     emit({Op::Not}, 0);
                   },
                   [&](const ex::And& a) {
                     boolean(a.lhs);
                     std::size_t j = emit({Op::JumpIfFalseKeep}, -1);
                     boolean(a.rhs);
                     patch(j);
                   },
                   [&](const ex::Or& o) {
                     boolean(o.lhs);
                     std::size_t j = emit({Op::JumpIfTrueKeep}, -1);
                     boolean(o.rhs);
                     patch(j);
                   },
               },
               b.node().value);
  }

  std::shared_ptr<const Code> finish() { return std::make_shared<const Code>(std::move(code_)); }

 private:
  std::size_t emit(Instr i, int delta) {
    code_.instrs.push_back(i);
    depth_ += delta;
    code_.max_stack = std::max(code_.max_stack, static_cast<std::size_t>(std::max(depth_, 1)) + 1);
    return code_.instrs.size() - 1;
  }
  void patch(std::size_t at) { code_.instrs[at].arg = static_cast<std::uint32_t>(code_.instrs.size()); }

  const SymbolTable& table_;
  Code code_;
  int depth_ = 0;
};

[[noreturn]] void non_finite() { throw EvalError("non-finite value during evaluation"); }

double run(const Code& code, const double* slots) {
  constexpr std::size_t kInline = 32;
  double inline_stack[kInline] = {};
  std::vector<double> heap;
  double* st = inline_stack;
  if (code.max_stack > kInline) {
    heap.resize(code.max_stack);
    st = heap.data();
  }
  std::size_t sp = 0;
  const Instr* ins = code.instrs.data();
  const std::size_t n = code.instrs.size();
  for (std::size_t pc = 0; pc < n; ++pc) {
    const Instr& i = ins[pc];
    switch (i.op) {
      case Op::Const:
        st[sp++] = i.k;
        break;
      case Op::Load: {
        double v = slots[i.arg];
        if (std::isnan(v)) throw EvalError("unbound variable " + code.names[i.arg]);
        st[sp++] = v;
        break;
      }
      case Op::Neg:
        st[sp - 1] = -st[sp - 1];
        break;
      case Op::Add:
        --sp;
        st[sp - 1] += st[sp];
        break;
      case Op::Sub:
        --sp;
        st[sp - 1] -= st[sp];
        break;
      case Op::Mul:
        --sp;
        st[sp - 1] *= st[sp];
        break;
      case Op::Div:
        --sp;
        if (st[sp] == 0.0) throw EvalError("division by zero");
        st[sp - 1] /= st[sp];
        break;
      case Op::Pow: {
        double base = st[sp - 1];
        double r = 1.0;
        for (std::uint32_t k = 0; k < i.arg; ++k) r *= base;
        st[sp - 1] = r;
        break;
      }
      case Op::Sin:
        st[sp - 1] = std::sin(st[sp - 1]);
        break;
      case Op::Cos:
        st[sp - 1] = std::cos(st[sp - 1]);
        break;
      case Op::Exp:
        st[sp - 1] = std::exp(st[sp - 1]);
        if (!std::isfinite(st[sp - 1])) non_finite();
        break;
      case Op::Sqrt:
        if (st[sp - 1] < 0) throw EvalError("square root of a negative value");
        st[sp - 1] = std::sqrt(st[sp - 1]);
        break;
      case Op::Abs:
        st[sp - 1] = std::fabs(st[sp - 1]);
        break;
      case Op::Sgn: {
        double v = st[sp - 1];
        st[sp - 1] = v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0);
        break;
      }
      case Op::Min:
        --sp;
        st[sp - 1] = std::min(st[sp - 1], st[sp]);
        break;
      case Op::Max:
        --sp;
        st[sp - 1] = std::max(st[sp - 1], st[sp]);
        break;
      case Op::Cmp: {
        --sp;
        double a = st[sp - 1];
        double b = st[sp];
        if (!std::isfinite(a) || !std::isfinite(b)) non_finite();
        bool r = false;
        switch (static_cast<CmpOp>(i.arg)) {
          case CmpOp::Lt: r = a < b; break;
          case CmpOp::Le: r = a <= b; break;
          case CmpOp::Eq: r = a == b; break;
          case CmpOp::Ge: r = a >= b; break;
          case CmpOp::Gt: r = a > b; break;
        }
        st[sp - 1] = r ? 1.0 : 0.0;
        break;
      }
      case Op::Not:
        st[sp - 1] = st[sp - 1] != 0.0 ? 0.0 : 1.0;
        break;
      case Op::JumpIfFalse:
        --sp;
        if (st[sp] == 0.0) pc = i.arg - 1;
        break;
      case Op::JumpIfFalseKeep:
        if (st[sp - 1] == 0.0) {
          pc = i.arg - 1;
        } else {
          --sp;
        }
        break;
      case Op::JumpIfTrueKeep:
        if (st[sp - 1] != 0.0) {
          pc = i.arg - 1;
        } else {
          --sp;
        }
        break;
      case Op::Jump:
        pc = i.arg - 1;
        break;
    }
  }
  return st[0];
}

}  // namespace

SymbolTable::SymbolTable(std::vector<std::string> names) : names_(std::move(names)) {
  std::sort(names_.begin(), names_.end());
  names_.erase(std::unique(names_.begin(), names_.end()), names_.end());
}

std::optional<std::size_t> SymbolTable::find(std::string_view name) const {
  auto it = std::lower_bound(names_.begin(), names_.end(), name);
  if (it == names_.end() || *it != name) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

std::size_t SymbolTable::index(std::string_view name) const {
  auto slot = find(name);
  if (!slot) throw EvalError("unbound variable " + std::string(name));
  return *slot;
}

double CompiledExpr::operator()(const double* slots) const {
  double v = run(*code_, slots);
  if (!std::isfinite(v)) non_finite();
  return v;
}

bool CompiledBool::operator()(const double* slots) const { return run(*code_, slots) != 0.0; }

CompiledExpr compile(const Expr& e, const SymbolTable& table) {
  Compiler c(table);
  c.expr(e);
  return CompiledExpr(c.finish());
}

CompiledBool compile(const BoolExpr& b, const SymbolTable& table) {
  Compiler c(table);
  c.boolean(b);
  return CompiledBool(c.finish());
}

namespace {

SymbolTable table_of(const Valuation& env) {
  std::vector<std::string> names;
  for (const auto& [k, v] : env) names.push_back(k);
  return SymbolTable(std::move(names));
}

std::vector<double> slots_of(const Valuation& env) {
  std::vector<double> out;
  for (const auto& [k, v] : env) out.push_back(v);  // map order matches the sorted table
  return out;
}

}  // namespace

double evaluate(const Expr& e, const Valuation& env) {
  auto slots = slots_of(env);
  return compile(e, table_of(env))(slots.data());
}

bool evaluate(const BoolExpr& b, const Valuation& env) {
  auto slots = slots_of(env);
  return compile(b, table_of(env))(slots.data());
}

// ---- exact ----

namespace {

struct Transcendental {};

Rational exact(const Expr& e, const std::map<std::string, Rational>& env);

bool exact(const BoolExpr& b, const std::map<std::string, Rational>& env) {
  return std::visit(overloaded{
                        [](const ex::BoolConst& c) { return c.value; },
                        [&](const ex::Compare& c) {
                          Rational a = exact(c.lhs, env);
                          Rational b2 = exact(c.rhs, env);
                          switch (c.op) {
                            case CmpOp::Lt: return a < b2;
                            case CmpOp::Le: return a <= b2;
                            case CmpOp::Eq: return a == b2;
                            case CmpOp::Ge: return a >= b2;
                            case CmpOp::Gt: return a > b2;
                          }
                          return false;
                        },
                        [&](const ex::Not& n) { return !exact(n.operand, env); },
                        [&](const ex::And& a) { return exact(a.lhs, env) && exact(a.rhs, env); },
                        [&](const ex::Or& o) { return exact(o.lhs, env) || exact(o.rhs, env); },
                    },
                    b.node().value);
}

Rational exact(const Expr& e, const std::map<std::string, Rational>& env) {
  return std::visit(overloaded{
                        [](const ex::Const& c) { return c.value; },
                        [&](const ex::Var& v) {
                          auto it = env.find(v.name);
                          if (it == env.end()) throw EvalError("unbound variable " + v.name);
                          return it->second;
                        },
                        [&](const ex::Named& n) { return exact(n.body, env); },
                        [&](const ex::Neg& n) { return Rational(-exact(n.operand, env)); },
                        [&](const ex::Binary& b) {
                          Rational l = exact(b.lhs, env);
                          Rational r = exact(b.rhs, env);
                          switch (b.op) {
                            case BinaryOp::Add: return Rational(l + r);
                            case BinaryOp::Sub: return Rational(l - r);
                            case BinaryOp::Mul: return Rational(l * r);
                            case BinaryOp::Div:
                              if (r == 0) throw EvalError("division by zero");
                              return Rational(l / r);
                          }
                          return Rational(0);
                        },
                        [&](const ex::Pow& p) {
                          Rational base = exact(p.base, env);
                          Rational r = 1;
                          for (unsigned k = 0; k < p.exponent; ++k) r *= base;
                          return r;
                        },
                        [&](const ex::Call& c) -> Rational {
                          switch (c.fn) {
                            case Function::Abs: {
                              Rational v = exact(c.args[0], env);
                              return v < 0 ? Rational(-v) : v;
                            }
                            case Function::Sgn: {
                              Rational v = exact(c.args[0], env);
                              return Rational(v > 0 ? 1 : (v < 0 ? -1 : 0));
                            }
                            case Function::Min: return std::min(exact(c.args[0], env), exact(c.args[1], env));
                            case Function::Max: return std::max(exact(c.args[0], env), exact(c.args[1], env));
                            default: throw Transcendental{};
                          }
                        },
                        [&](const ex::Piecewise& p) {
                          for (const auto& [g, v] : p.branches) {
                            if (exact(g, env)) return exact(v, env);
                          }
                          return exact(p.otherwise, env);
                        },
                    },
                    e.node().value);
}

}  // namespace

std::optional<Rational> evaluate_exact(const Expr& e, const std::map<std::string, Rational>& env) {
  try {
    return exact(e, env);
  } catch (const Transcendental&) {
    return std::nullopt;
  }
}

std::optional<bool> evaluate_exact(const BoolExpr& b, const std::map<std::string, Rational>& env) {
  try {
    return exact(b, env);
  } catch (const Transcendental&) {
    return std::nullopt;
  }
}

bool has_transcendental(const Expr& e) {
  return std::visit(overloaded{
                        [](const ex::Call& c) {
                          switch (c.fn) {
                            case Function::Sin:
                            case Function::Cos:
                            case Function::Exp:
                            case Function::Sqrt:
                            case Function::Pi: return true;
                            default: break;
                          }
                          return std::any_of(c.args.begin(), c.args.end(), has_transcendental);
                        },
                        [](const ex::Named& n) { return has_transcendental(n.body); },
                        [](const ex::Neg& n) { return has_transcendental(n.operand); },
                        [](const ex::Binary& b) { return has_transcendental(b.lhs) || has_transcendental(b.rhs); },
                        [](const ex::Pow& p) { return has_transcendental(p.base); },
                        [](const ex::Piecewise& p) {
                          for (const auto& br : p.branches) {
                            if (has_transcendental(br.second)) return true;
                          }
                          return has_transcendental(p.otherwise);
                        },
                        [](const auto&) { return false; },
                    },
                    e.node().value);
}

}  // namespace shcsp
