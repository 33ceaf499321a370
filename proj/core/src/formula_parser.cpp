#include <cmath>
#include <stdexcept>

#include "grammar.hpp"
#include "shcsp/assertion.hpp"
#include "shcsp/eval.hpp"

namespace shcsp {

namespace {

using detail::Grammar;
using detail::TokKind;

class FormulaGrammar {
 public:
  explicit FormulaGrammar(std::string_view text) : g_(detail::tokenize(text)) { g_.allow_now = true; }

  template <class F>
  auto whole(F&& parse) {
    auto result = parse();
    if (!g_.at_end()) g_.fail("unexpected '" + g_.peek().text + "' after formula");
    return result;
  }

  // ---- shared connectives ----

  bool at_word(std::string_view w) const { return g_.at_ident(w); }

  bool accept_word(std::string_view w) {
    if (!g_.at_ident(w)) return false;
    g_.reset(g_.pos() + 1);
    return true;
  }

  bool accept_not() { return accept_word("not") || g_.accept("!"); }
  bool accept_and() { return accept_word("and") || g_.accept("&&") || g_.accept("&"); }
  bool accept_or() { return accept_word("or") || g_.accept("||") || g_.accept("|"); }
  bool accept_implies() { return accept_word("implies") || g_.accept("->"); }

  // ---- trace terms ----

  bool at_trace() const { return g_.at_ident("tr") || g_.at_ident("eps") || g_.at_sym("<"); }

  TraceTerm trace() {
    TraceTerm lhs = trace_postfix();
    while (g_.accept("++")) lhs = TraceTerm::concat(lhs, trace_postfix());
    return lhs;
  }

  TraceTerm trace_postfix() {
    TraceTerm t = trace_atom();
    while (g_.accept("*")) t = TraceTerm::star(t);
    return t;
  }

  TraceTerm trace_atom() {
    if (accept_word("tr")) return TraceTerm::history();
    if (accept_word("eps")) return TraceTerm::epsilon();
    if (g_.accept("(")) {
      TraceTerm t = trace();
      g_.expect(")");
      return t;
    }
    g_.expect("<");
    std::string chan = g_.expect_ident("channel name");
    g_.expect(".");
    std::optional<Expr> value = item_part();
    g_.expect(",");
    std::optional<Expr> time = item_part();
    g_.expect(">");
    return TraceTerm::item(std::move(chan), std::move(value), std::move(time));
  }

  std::optional<Expr> item_part() {
    if (accept_word("_")) return std::nullopt;
    return g_.expr();
  }

  // ---- state formulas ----

  StateFormula state() {
    StateFormula lhs = state_or();
    if (accept_implies()) return StateFormula::disjunction(StateFormula::negation(lhs), state());
    return lhs;
  }

  StateFormula state_or() {
    StateFormula lhs = state_and();
    while (accept_or()) lhs = StateFormula::disjunction(lhs, state_and());
    return lhs;
  }

  StateFormula state_and() {
    StateFormula lhs = state_unit();
    while (accept_and()) lhs = StateFormula::conjunction(lhs, state_unit());
    return lhs;
  }

  StateFormula state_unit() {
    if (accept_not()) return StateFormula::negation(state_unit());
    if (accept_word("true")) return StateFormula::verum();
    if (accept_word("false")) return StateFormula::falsum();
    if (g_.at_sym("(")) {
      const std::size_t start = g_.pos();
      try {
        g_.reset(start + 1);
        StateFormula s = state();
        g_.expect(")");
        if (!g_.at_cmp() && !at_arith_op()) return s;
      } catch (const ParseError&) {
      }
      g_.reset(start);
    }
    if (at_trace()) {
      TraceTerm h = trace();
      if (g_.accept(".")) {
        std::string chan = g_.expect_ident("channel name");
        if (g_.accept("?")) return StateFormula::ready(h, chan, Direction::Input);
        if (g_.accept("!")) return StateFormula::ready(h, chan, Direction::Output);
        g_.fail("expected '?' or '!' after readiness channel");
      }
      if (!g_.accept("=") && !g_.accept("==")) g_.fail("traces can only be compared with '='");
      return StateFormula::relation(h, CmpOp::Eq, trace());
    }
    Expr lhs = g_.expr();
    if (!g_.at_cmp()) g_.fail("expected comparison operator, found '" + g_.peek().text + "'");
    const CmpOp op = Grammar::cmp_of(g_.peek().text);
    g_.reset(g_.pos() + 1);
    if (at_trace()) g_.fail("cannot compare a value with a trace");
    return StateFormula::relation(lhs, op, g_.expr());
  }

  bool at_arith_op() const {
    return g_.at_sym("+") || g_.at_sym("-") || g_.at_sym("*") || g_.at_sym("/") || g_.at_sym("^");
  }

  // ---- formulas ----

  Formula formula() {
    Formula lhs = formula_or();
    if (accept_implies()) return Formula::disjunction(Formula::negation(lhs), formula());
    return lhs;
  }

  Formula formula_or() {
    Formula lhs = formula_and();
    while (accept_or()) lhs = Formula::disjunction(lhs, formula_and());
    return lhs;
  }

  Formula formula_and() {
    Formula lhs = formula_unit();
    while (accept_and()) lhs = Formula::conjunction(lhs, formula_unit());
    return lhs;
  }

  Formula formula_unit() {
    if (accept_not()) return Formula::negation(formula_unit());
    if (accept_word("true")) return Formula::verum();
    if (accept_word("false")) return Formula::falsum();
    if (g_.accept("(")) {
      Formula f = formula();
      g_.expect(")");
      return f;
    }
    if (at_word("at") && g_.at_sym("(", 1)) {
      g_.reset(g_.pos() + 2);
      StateFormula s = state();
      g_.expect(",");
      Expr t = g_.expr();
      g_.expect(")");
      return Formula::holds_at(s, t);
    }
    if ((at_word("during") || at_word("in")) && g_.at_sym("(", 1)) {
      const bool during = at_word("during");
      g_.reset(g_.pos() + 2);
      StateFormula s = state();
      g_.expect(",");
      auto [a, b] = interval();
      g_.expect(")");
      return during ? Formula::holds_during(s, a, b) : Formula::holds_in(s, a, b);
    }
    if (accept_word("forall")) {
      std::string var = g_.expect_ident("variable name");
      if (var == "now" || var == "tr" || var == "eps") g_.fail("'" + var + "' cannot be quantified");
      if (!accept_word("in")) g_.fail("expected 'in' after quantified variable");
      if (g_.at_sym("[")) {
        auto [a, b] = interval();
        g_.expect(":");
        return Formula::forall_times(var, a, b, formula());
      }
      std::vector<double> grid = value_grid();
      g_.expect(":");
      return Formula::forall_values(var, std::move(grid), formula());
    }
    g_.fail("expected formula, found '" + g_.peek().text + "'");
  }

  std::pair<Expr, Expr> interval() {
    g_.expect("[");
    Expr a = g_.expr();
    g_.expect(",");
    Expr b = g_.expr();
    g_.expect("]");
    return {a, b};
  }

  double constant() {
    const auto& tok = g_.peek();
    Expr e = g_.expr();
    try {
      return evaluate(e, Valuation{});
    } catch (const EvalError& err) {
      g_.fail_at(tok, std::string("quantifier bound must be a constant: ") + err.what());
    }
  }

  std::vector<double> value_grid() {
    std::vector<double> grid;
    if (g_.accept("{")) {
      grid.push_back(constant());
      while (g_.accept(",")) grid.push_back(constant());
      g_.expect("}");
      return grid;
    }
    if (!accept_word("grid")) g_.fail("expected '{', '[' or 'grid' after 'in'");
    g_.expect("(");
    const double a = constant();
    g_.expect(",");
    const double b = constant();
    g_.expect(",");
    const auto& count_tok = g_.peek();
    const double n = constant();
    g_.expect(")");
    if (n < 1 || n != std::floor(n) || n > 1e7) g_.fail_at(count_tok, "grid size must be a positive integer");
    const auto count = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i < count; ++i) {
      grid.push_back(count == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    }
    return grid;
  }

  // ---- probability formulas ----

  ProbFormula prob() {
    ProbFormula lhs = prob_and();
    while (accept_or()) lhs = ProbFormula::disjunction(lhs, prob_and());
    return lhs;
  }

  ProbFormula prob_and() {
    ProbFormula lhs = prob_unit();
    while (accept_and()) lhs = ProbFormula::conjunction(lhs, prob_unit());
    return lhs;
  }

  ProbFormula prob_unit() {
    if (accept_not()) return ProbFormula::negation(prob_unit());
    if (g_.accept("(")) {
      ProbFormula f = prob();
      g_.expect(")");
      return f;
    }
    if (!accept_word("P")) g_.fail("expected 'P(', found '" + g_.peek().text + "'");
    g_.expect("(");
    ProbBound b;
    b.formula = formula();
    g_.expect(")");
    if (!g_.at_cmp() || g_.at_sym("=") || g_.at_sym("==")) g_.fail("expected one of < <= >= > after P(...)");
    b.op = Grammar::cmp_of(g_.peek().text);
    g_.reset(g_.pos() + 1);
    const auto& tok = g_.peek();
    b.p = g_.rational_literal();
    if (b.p < 0 || b.p > 1) g_.fail_at(tok, "probability bound must lie in [0, 1]");
    return ProbFormula::bound(std::move(b));
  }

 private:
  Grammar g_;
};

}  // namespace

StateFormula parse_state_formula(std::string_view text) {
  FormulaGrammar g(text);
  return g.whole([&] { return g.state(); });
}

Formula parse_formula(std::string_view text) {
  FormulaGrammar g(text);
  return g.whole([&] { return g.formula(); });
}

ProbFormula parse_prob_formula(std::string_view text) {
  FormulaGrammar g(text);
  return g.whole([&] { return g.prob(); });
}

}  // namespace shcsp
