#include <map>
#include <set>

#include "shcsp/cert.hpp"
#include "shcsp/printer.hpp"

namespace shcsp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// ---------------------------------------------------------------- sums of products

// Variables and definitions sort first, then function calls, then anything else.
struct AtomKey {
  int rank;
  std::string text;
  bool operator<(const AtomKey& o) const { return rank != o.rank ? rank < o.rank : text < o.text; }
  bool operator==(const AtomKey& o) const { return rank == o.rank && text == o.text; }
};

using Monomial = std::map<AtomKey, unsigned>;
using Poly = std::map<Monomial, Rational>;

class Simplifier {
 public:
  Expr run(const Expr& e) { return build(poly(e)); }

 private:
  std::map<AtomKey, Expr> atoms_;

  static Poly constant(const Rational& c) {
    Poly p;
    if (c != 0) p[Monomial{}] = c;
    return p;
  }

  static std::optional<Rational> as_constant(const Poly& p) {
    if (p.empty()) return Rational(0);
    if (p.size() == 1 && p.begin()->first.empty()) return p.begin()->second;
    return std::nullopt;
  }

  Poly atom(int rank, const Expr& e) {
    AtomKey key{rank, to_string(e)};
    atoms_.emplace(key, e);
    Poly p;
    p[Monomial{{key, 1}}] = 1;
    return p;
  }

  static Poly add(Poly a, const Poly& b, const Rational& scale = 1) {
    for (const auto& [m, c] : b) {
      Rational& slot = a[m];
      slot += scale * c;
      if (slot == 0) a.erase(m);
    }
    return a;
  }

  static Poly mul(const Poly& a, const Poly& b) {
    Poly out;
    for (const auto& [ma, ca] : a) {
      for (const auto& [mb, cb] : b) {
        Monomial m = ma;
        for (const auto& [k, n] : mb) m[k] += n;
        Rational& slot = out[m];
        slot += ca * cb;
        if (slot == 0) out.erase(m);
      }
    }
    return out;
  }

  Poly poly(const Expr& e) {
    return std::visit(
        overloaded{
            [&](const ex::Const& c) { return constant(c.value); },
            [&](const ex::Var&) { return atom(0, e); },
            [&](const ex::Named&) { return atom(0, e); },
            [&](const ex::Neg& n) { return add(Poly{}, poly(n.operand), -1); },
            [&](const ex::Binary& b) {
              switch (b.op) {
                case BinaryOp::Add: return add(poly(b.lhs), poly(b.rhs));
                case BinaryOp::Sub: return add(poly(b.lhs), poly(b.rhs), -1);
                case BinaryOp::Mul: return mul(poly(b.lhs), poly(b.rhs));
                case BinaryOp::Div: break;
              }
              Poly num = poly(b.lhs);
              Poly den = poly(b.rhs);
              auto c = as_constant(den);
              if (c && *c != 0) return add(Poly{}, num, 1 / *c);
              if (num.empty()) return Poly{};
              return atom(2, Expr::binary(BinaryOp::Div, build(num), build(den)));
            },
            [&](const ex::Pow& p) {
              Poly base = poly(p.base);
              Poly out = constant(1);
              for (unsigned k = 0; k < p.exponent; ++k) out = mul(out, base);
              return out;
            },
            [&](const ex::Call& c) { return call(c); },
            [&](const ex::Piecewise& pw) { return piecewise(pw); },
        },
        e.node().value);
  }

  Poly call(const ex::Call& c) {
    std::vector<Expr> args;
    std::vector<std::optional<Rational>> consts;
    for (const auto& a : c.args) {
      Poly p = poly(a);
      consts.push_back(as_constant(p));
      args.push_back(build(p));
    }
    auto is = [&](std::size_t i, long v) { return consts[i] && *consts[i] == v; };
    switch (c.fn) {
      case Function::Sin:
        if (is(0, 0)) return Poly{};
        break;
      case Function::Cos:
      case Function::Exp:
        if (is(0, 0)) return constant(1);
        break;
      case Function::Sqrt:
        if (is(0, 0)) return Poly{};
        if (is(0, 1)) return constant(1);
        break;
      case Function::Abs:
        if (consts[0]) return constant(*consts[0] < 0 ? Rational(-*consts[0]) : *consts[0]);
        break;
      case Function::Sgn:
        if (consts[0]) return constant(*consts[0] > 0 ? 1 : (*consts[0] < 0 ? -1 : 0));
        break;
      case Function::Min:
        if (consts[0] && consts[1]) return constant(std::min(*consts[0], *consts[1]));
        break;
      case Function::Max:
        if (consts[0] && consts[1]) return constant(std::max(*consts[0], *consts[1]));
        break;
      case Function::Pi: break;
    }
    return atom(1, Expr::call(c.fn, std::move(args)));
  }

  BoolExpr guard(const BoolExpr& b) {
    return std::visit(overloaded{
                          [&](const ex::BoolConst&) { return b; },
                          [&](const ex::Compare& c) {
                            Poly l = poly(c.lhs);
                            Poly r = poly(c.rhs);
                            auto lc = as_constant(l);
                            auto rc = as_constant(r);
                            if (lc && rc) {
                              bool v = false;
                              switch (c.op) {
                                case CmpOp::Lt: v = *lc < *rc; break;
                                case CmpOp::Le: v = *lc <= *rc; break;
                                case CmpOp::Eq: v = *lc == *rc; break;
                                case CmpOp::Ge: v = *lc >= *rc; break;
                                case CmpOp::Gt: v = *lc > *rc; break;
                              }
                              return BoolExpr::literal(v);
                            }
                            return BoolExpr::compare(build(l), c.op, build(r));
                          },
                          [&](const ex::Not& n) {
                            BoolExpr o = guard(n.operand);
                            if (auto* k = std::get_if<ex::BoolConst>(&o.node().value)) return BoolExpr::literal(!k->value);
                            return BoolExpr::negation(o);
                          },
                          [&](const ex::And& a) {
                            BoolExpr l = guard(a.lhs);
                            BoolExpr r = guard(a.rhs);
                            if (auto* k = std::get_if<ex::BoolConst>(&l.node().value)) return k->value ? r : l;
                            if (auto* k = std::get_if<ex::BoolConst>(&r.node().value)) return k->value ? l : r;
                            return BoolExpr::conjunction(l, r);
                          },
                          [&](const ex::Or& o) {
                            BoolExpr l = guard(o.lhs);
                            BoolExpr r = guard(o.rhs);
                            if (auto* k = std::get_if<ex::BoolConst>(&l.node().value)) return k->value ? l : r;
                            if (auto* k = std::get_if<ex::BoolConst>(&r.node().value)) return k->value ? r : l;
                            return BoolExpr::disjunction(l, r);
                          },
                      },
                      b.node().value);
  }

  Poly piecewise(const ex::Piecewise& pw) {
    std::vector<std::pair<BoolExpr, Expr>> branches;
    std::vector<Poly> values;
    for (const auto& [g, e] : pw.branches) {
      BoolExpr sg = guard(g);
      if (auto* k = std::get_if<ex::BoolConst>(&sg.node().value)) {
        if (!k->value) continue;
        if (branches.empty()) return poly(e);
        Poly p = poly(e);
        values.push_back(p);
        return finish_piecewise(std::move(branches), std::move(values), p);
      }
      Poly p = poly(e);
      values.push_back(p);
      branches.emplace_back(sg, build(p));
    }
    Poly other = poly(pw.otherwise);
    if (branches.empty()) return other;
    return finish_piecewise(std::move(branches), std::move(values), other);
  }

  Poly finish_piecewise(std::vector<std::pair<BoolExpr, Expr>> branches, std::vector<Poly> values,
                        const Poly& otherwise) {
    bool uniform = true;
    for (const auto& v : values) uniform = uniform && v == otherwise;
    if (uniform) return otherwise;
    return atom(2, Expr::piecewise(std::move(branches), build(otherwise)));
  }

  Expr factor(const AtomKey& k, unsigned n) const {
    const Expr& a = atoms_.at(k);
    return n == 1 ? a : Expr::power(a, n);
  }

  // |c| * factors, with the sign of c folded into the leading factor when
  // `signed_lead` is set
  Expr term(const Monomial& m, const Rational& c, bool signed_lead) const {
    const Rational mag = c < 0 ? Rational(-c) : c;
    const bool negative = signed_lead && c < 0;
    std::optional<Expr> out;
    if (mag != 1 || m.empty()) out = Expr::constant(negative ? Rational(-mag) : mag);
    for (const auto& [k, n] : m) {
      Expr f = factor(k, n);
      if (!out) {
        out = negative ? Expr::negate(f) : f;
      } else {
        out = Expr::binary(BinaryOp::Mul, *out, f);
      }
    }
    return *out;
  }

  Expr build(const Poly& p) const {
    if (p.empty()) return Expr::constant(0);
    std::vector<std::pair<const Monomial*, const Rational*>> order;
    for (const auto& [m, c] : p) {
      if (!m.empty()) order.emplace_back(&m, &c);
    }
    if (auto it = p.find(Monomial{}); it != p.end()) order.emplace_back(&it->first, &it->second);
    std::optional<Expr> out;
    for (const auto& [m, c] : order) {
      if (!out) {
        out = term(*m, *c, true);
      } else if (*c < 0) {
        out = Expr::binary(BinaryOp::Sub, *out, term(*m, *c, false));
      } else {
        out = Expr::binary(BinaryOp::Add, *out, term(*m, *c, false));
      }
    }
    return *out;
  }
};

// ---------------------------------------------------------------- differentiation

bool depends(const Expr& e, const std::string& v) { return free_variables(e).count(v) > 0; }

void guard_boundaries(const BoolExpr& b, const std::string& v, std::vector<Expr>& out) {
  std::visit(overloaded{
                 [](const ex::BoolConst&) {},
                 [&](const ex::Compare& c) {
                   Expr gap = c.lhs - c.rhs;
                   if (depends(gap, v)) out.push_back(gap);
                 },
                 [&](const ex::Not& n) { guard_boundaries(n.operand, v, out); },
                 [&](const ex::And& a) {
                   guard_boundaries(a.lhs, v, out);
                   guard_boundaries(a.rhs, v, out);
                 },
                 [&](const ex::Or& o) {
                   guard_boundaries(o.lhs, v, out);
                   guard_boundaries(o.rhs, v, out);
                 },
             },
             b.node().value);
}

class Differentiator {
 public:
  Differentiator(std::string var, bool relaxed) : v_(std::move(var)), relaxed_(relaxed) {}

  std::vector<Expr> singular;

  Expr d(const Expr& e) {
    if (!depends(e, v_)) return Expr::constant(0);
    return std::visit(
        overloaded{
            [&](const ex::Const&) { return Expr::constant(0); },
            [&](const ex::Var& x) { return Expr::constant(x.name == v_ ? 1 : 0); },
            [&](const ex::Named& n) { return d(n.body); },
            [&](const ex::Neg& n) { return -d(n.operand); },
            [&](const ex::Binary& b) {
              switch (b.op) {
                case BinaryOp::Add: return d(b.lhs) + d(b.rhs);
                case BinaryOp::Sub: return d(b.lhs) - d(b.rhs);
                case BinaryOp::Mul: return d(b.lhs) * b.rhs + b.lhs * d(b.rhs);
                case BinaryOp::Div: break;
              }
              return (d(b.lhs) * b.rhs - b.lhs * d(b.rhs)) / Expr::power(b.rhs, 2);
            },
            [&](const ex::Pow& p) {
              if (p.exponent == 0) return Expr::constant(0);
              Expr lower = p.exponent == 1 ? Expr::constant(1) : Expr::power(p.base, p.exponent - 1);
              return Expr::constant(static_cast<long>(p.exponent)) * lower * d(p.base);
            },
            [&](const ex::Call& c) { return call(e, c); },
            [&](const ex::Piecewise& pw) {
              if (!relaxed_) throw NonDifferentiable(to_string(e), v_);
              std::vector<std::pair<BoolExpr, Expr>> branches;
              for (const auto& [g, b] : pw.branches) {
                guard_boundaries(g, v_, singular);
                branches.emplace_back(g, d(b));
              }
              return Expr::piecewise(std::move(branches), d(pw.otherwise));
            },
        },
        e.node().value);
  }

 private:
  Expr call(const Expr& e, const ex::Call& c) {
    const Expr& u = c.args.empty() ? e : c.args[0];
    switch (c.fn) {
      case Function::Sin: return Expr::call(Function::Cos, {u}) * d(u);
      case Function::Cos: return -(Expr::call(Function::Sin, {u}) * d(u));
      case Function::Exp: return e * d(u);
      case Function::Sqrt: return d(u) / (Expr::constant(2) * e);
      case Function::Pi: return Expr::constant(0);
      default: break;
    }
    if (!relaxed_) throw NonDifferentiable(to_string(e), v_);
    switch (c.fn) {
      case Function::Abs:
        singular.push_back(u);
        return Expr::call(Function::Sgn, {u}) * d(u);
      case Function::Sgn:
        singular.push_back(u);
        return Expr::constant(0);
      case Function::Min:
      case Function::Max: {
        const Expr& a = c.args[0];
        const Expr& b = c.args[1];
        singular.push_back(a - b);
        const CmpOp op = c.fn == Function::Min ? CmpOp::Lt : CmpOp::Gt;
        return Expr::piecewise({{BoolExpr::compare(a, op, b), d(a)}}, d(b));
      }
      default: return Expr::constant(0);
    }
  }

  std::string v_;
  bool relaxed_;
};

void add_unique(std::vector<Expr>& out, const std::vector<Expr>& more) {
  std::set<std::string> seen;
  for (const auto& e : out) seen.insert(to_string(e));
  for (const auto& e : more) {
    Expr s = simplify(e);
    if (s.is_constant()) continue;
    if (seen.insert(to_string(s)).second) out.push_back(s);
  }
}

template <class DiffFn>
Expr generator(const Expr& f, const SdeBlock& block, DiffFn&& partial) {
  const std::size_t n = block.dim();
  std::vector<Expr> first(n);
  Expr total = Expr::constant(0);
  for (std::size_t i = 0; i < n; ++i) {
    first[i] = partial(f, block.vars[i]);
    if (!first[i].is_constant(0)) total = total + block.drift[i] * first[i];
  }
  Expr second = Expr::constant(0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Expr a = Expr::constant(0);
      for (std::size_t k = 0; k < block.brownian_dim(); ++k) a = a + block.diffusion[i][k] * block.diffusion[j][k];
      Expr dij = partial(first[i], block.vars[j]);
      if (dij.is_constant(0)) continue;
      a = simplify(a);
      if (a.is_constant(0)) continue;
      second = second + a * dij;
    }
  }
  return simplify(total + Expr::constant(Rational(1, 2)) * second);
}

}  // namespace

Expr simplify(const Expr& e) { return Simplifier().run(e); }

Expr diff(const Expr& e, const std::string& var) {
  Differentiator d(var, false);
  return simplify(d.d(e));
}

OffSingular diff_off_singular(const Expr& e, const std::string& var) {
  Differentiator d(var, true);
  OffSingular out{simplify(d.d(e)), {}};
  add_unique(out.singular, d.singular);
  return out;
}

Expr lie_derivative(const Expr& f, const SdeBlock& block) {
  return generator(f, block, [](const Expr& e, const std::string& v) { return diff(e, v); });
}

OffSingular lie_derivative_off_singular(const Expr& f, const SdeBlock& block) {
  OffSingular out;
  out.value = generator(f, block, [&](const Expr& e, const std::string& v) {
    OffSingular part = diff_off_singular(e, v);
    add_unique(out.singular, part.singular);
    return part.value;
  });
  return out;
}

}  // namespace shcsp
