#include "shcsp/parser.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>

#include "grammar.hpp"

namespace shcsp {
namespace detail {

namespace {

constexpr std::string_view kReserved[] = {"skip", "def", "if", "then", "elif", "else", "true", "false", "dt", "dW"};

std::string describe(const Token& t) {
  if (t.kind == TokKind::End) return "end of input";
  return "'" + t.text + "'";
}

bool is_identity_name(const std::string& s, std::size_t& n) {
  if (s.size() < 2 || s[0] != 'I') return false;
  if (!std::all_of(s.begin() + 1, s.end(), [](char c) { return c >= '0' && c <= '9'; })) return false;
  n = std::stoul(s.substr(1));
  return true;
}

}  // namespace

bool is_reserved_word(std::string_view s) {
  return std::find(std::begin(kReserved), std::end(kReserved), s) != std::end(kReserved);
}

void Grammar::set_limit(std::size_t limit) {
  limit_ = limit;
  const Token& at = toks_[std::min(limit, toks_.size() - 1)];
  sentinel_ = Token{TokKind::End, "", at.line, at.col};
}

const Token& Grammar::peek(std::size_t ahead) const {
  std::size_t i = pos_ + ahead;
  if (i >= limit_) return sentinel_;
  return toks_[i];
}

bool Grammar::at_sym(std::string_view s, std::size_t ahead) const {
  const Token& t = peek(ahead);
  return t.kind == TokKind::Sym && t.text == s;
}

bool Grammar::at_ident(std::string_view s, std::size_t ahead) const {
  const Token& t = peek(ahead);
  return t.kind == TokKind::Ident && t.text == s;
}

bool Grammar::accept(std::string_view sym) {
  if (!at_sym(sym)) return false;
  ++pos_;
  return true;
}

void Grammar::expect(std::string_view sym) {
  if (!accept(sym)) fail("expected '" + std::string(sym) + "', found " + describe(peek()));
}

std::string Grammar::expect_ident(std::string_view what) {
  const Token& t = peek();
  if (t.kind != TokKind::Ident) fail("expected " + std::string(what) + ", found " + describe(t));
  ++pos_;
  return t.text;
}

void Grammar::fail(const std::string& message) const { fail_at(peek(), message); }

void Grammar::fail_at(const Token& t, const std::string& message) const { throw ParseError(message, t.line, t.col); }

void Grammar::parse_defs() {
  while (at_ident("def")) {
    ++pos_;
    const Token& name_tok = peek();
    std::string name = expect_ident("definition name");
    Function fn;
    if (is_reserved_word(name) || lookup_function(name, fn) || name == "now") {
      fail_at(name_tok, "reserved word '" + name + "' cannot be defined");
    }
    if (defs_.count(name)) fail_at(name_tok, "duplicate definition of '" + name + "'");
    expect("=");
    Expr body = expr();
    expect(";");
    defs_.emplace(name, Expr::named(name, body));
  }
}

// ---- arithmetic ----

Expr Grammar::expr() { return additive(); }

Expr Grammar::additive() {
  Expr lhs = term();
  for (;;) {
    if (accept("+")) {
      lhs = Expr::binary(BinaryOp::Add, lhs, term());
    } else if (accept("-")) {
      lhs = Expr::binary(BinaryOp::Sub, lhs, term());
    } else {
      return lhs;
    }
  }
}

Expr Grammar::term() {
  Expr lhs = unary();
  for (;;) {
    if (accept("*")) {
      lhs = Expr::binary(BinaryOp::Mul, lhs, unary());
    } else if (accept("/")) {
      lhs = Expr::binary(BinaryOp::Div, lhs, unary());
    } else {
      return lhs;
    }
  }
}

Expr Grammar::unary() {
  if (accept("-")) {
    // `-2` is a negative literal, `-2^2` is the negation of a power
    if (peek().kind == TokKind::Number && !at_sym("^", 1)) {
      Rational v = parse_rational(peek().text);
      ++pos_;
      return Expr::constant(-v);
    }
    return Expr::negate(unary());
  }
  return power();
}

Expr Grammar::power() {
  Expr base = primary();
  if (accept("^")) {
    const Token& t = peek();
    if (t.kind != TokKind::Number || t.text.find_first_not_of("0123456789") != std::string::npos) {
      fail("exponent must be a natural number literal");
    }
    ++pos_;
    return Expr::power(base, static_cast<unsigned>(std::stoul(t.text)));
  }
  return base;
}

Expr Grammar::primary() {
  const Token& t = peek();
  if (t.kind == TokKind::Number) {
    ++pos_;
    return Expr::constant(parse_rational(t.text));
  }
  if (accept("(")) {
    Expr e = expr();
    expect(")");
    return e;
  }
  if (t.kind != TokKind::Ident) fail("expected expression, found " + describe(t));
  if (t.text == "if") return piecewise();
  Function fn;
  if (lookup_function(t.text, fn)) {
    ++pos_;
    if (fn == Function::Pi) {
      if (accept("(")) expect(")");
      return Expr::pi();
    }
    expect("(");
    std::vector<Expr> args;
    if (!at_sym(")")) {
      args.push_back(expr());
      while (accept(",")) args.push_back(expr());
    }
    expect(")");
    if (args.size() != function_arity(fn)) {
      fail_at(t, t.text + " expects " + std::to_string(function_arity(fn)) + " argument(s), got " +
                     std::to_string(args.size()));
    }
    return Expr::call(fn, std::move(args));
  }
  if (at_sym("(", 1)) fail_at(t, "unknown function '" + t.text + "'");
  if (is_reserved_word(t.text)) fail_at(t, "unexpected keyword '" + t.text + "'");
  if (t.text == "now" && !allow_now) fail_at(t, "'now' is reserved");
  ++pos_;
  if (auto it = defs_.find(t.text); it != defs_.end()) return it->second;
  return Expr::variable(t.text);
}

Expr Grammar::piecewise() {
  ++pos_;  // if
  std::vector<std::pair<BoolExpr, Expr>> branches;
  BoolExpr g = bool_expr();
  if (!at_ident("then")) fail("expected 'then', found " + describe(peek()));
  ++pos_;
  branches.emplace_back(g, expr());
  while (at_ident("elif")) {
    ++pos_;
    BoolExpr g2 = bool_expr();
    if (!at_ident("then")) fail("expected 'then', found " + describe(peek()));
    ++pos_;
    branches.emplace_back(g2, expr());
  }
  if (!at_ident("else")) fail("expected 'else', found " + describe(peek()));
  ++pos_;
  Expr otherwise = expr();
  return Expr::piecewise(std::move(branches), otherwise);
}

std::vector<Expr> Grammar::bracket_list() {
  expect("[");
  std::vector<Expr> items{expr()};
  while (accept(",")) items.push_back(expr());
  expect("]");
  return items;
}

// ---- boolean ----

CmpOp Grammar::cmp_of(std::string_view s) {
  if (s == "<") return CmpOp::Lt;
  if (s == "<=") return CmpOp::Le;
  if (s == "=" || s == "==") return CmpOp::Eq;
  if (s == ">=") return CmpOp::Ge;
  return CmpOp::Gt;
}

bool Grammar::at_cmp() const {
  return at_sym("<") || at_sym("<=") || at_sym("=") || at_sym("==") || at_sym(">=") || at_sym(">");
}

BoolExpr Grammar::bool_expr() { return bool_or(); }

BoolExpr Grammar::bool_or() {
  BoolExpr lhs = bool_and();
  while (accept("|") || accept("||")) lhs = BoolExpr::disjunction(lhs, bool_and());
  return lhs;
}

BoolExpr Grammar::bool_and() {
  BoolExpr lhs = bool_not();
  while (accept("&") || accept("&&")) lhs = BoolExpr::conjunction(lhs, bool_not());
  return lhs;
}

BoolExpr Grammar::bool_not() {
  if (accept("!")) return BoolExpr::negation(bool_not());
  return bool_atom();
}

BoolExpr Grammar::bool_atom() {
  if (at_ident("true")) {
    ++pos_;
    return BoolExpr::literal(true);
  }
  if (at_ident("false")) {
    ++pos_;
    return BoolExpr::literal(false);
  }
  if (at_sym("(")) {
    const std::size_t save = pos_;
    try {
      ++pos_;
      BoolExpr inner = bool_expr();
      expect(")");
      // `(a + b) < c` starts like a parenthesised formula; reject and reparse
      if (!at_cmp() && !at_sym("+") && !at_sym("-") && !at_sym("*") && !at_sym("/") && !at_sym("^")) {
        return inner;
      }
    } catch (const ParseError&) {
    }
    pos_ = save;
  }
  Expr lhs = expr();
  if (!at_cmp()) fail("expected comparison operator, found " + describe(peek()));
  CmpOp op = cmp_of(peek().text);
  ++pos_;
  Expr rhs = expr();
  return BoolExpr::compare(lhs, op, rhs);
}

// ---- processes ----

Process Grammar::process() {
  std::vector<Process> parts{seq()};
  while (accept("||")) parts.push_back(seq());
  Process result = parts.back();
  for (std::size_t i = parts.size() - 1; i-- > 0;) result = Process::parallel(parts[i], result);
  return result;
}

Process Grammar::seq() {
  std::vector<Process> parts{unit()};
  while (accept(";")) parts.push_back(unit());
  Process result = parts.back();
  for (std::size_t i = parts.size() - 1; i-- > 0;) result = Process::seq(parts[i], result);
  return result;
}

Process Grammar::unit() {
  const Token& t = peek();
  if (t.kind == TokKind::Ident) {
    if (t.text == "skip") {
      ++pos_;
      return Process::skip();
    }
    if (at_sym(":=", 1) || at_sym("?", 1) || at_sym("!", 1)) {
      if (is_reserved_word(t.text) || t.text == "now") fail_at(t, "unexpected keyword '" + t.text + "'");
      std::string name = t.text;
      ++pos_;
      if (accept(":=")) {
        if (defs_.count(name)) fail_at(t, "cannot assign to definition '" + name + "'");
        return Process::assign(name, expr());
      }
      if (accept("?")) return Process::input(name, expect_ident("variable"));
      expect("!");
      return Process::output(name, expr());
    }
  }
  if (at_sym("{")) return brace_unit();
  if (at_sym("(")) return paren_unit();
  return cond();
}

Process Grammar::cond() {
  BoolExpr guard = bool_expr();
  expect("->");
  expect("{");
  Process body = process();
  expect("}");
  return Process::cond(guard, body);
}

Process Grammar::paren_unit() {
  const std::size_t save = pos_;
  std::optional<ParseError> cond_err;
  try {
    return cond();
  } catch (const ParseError& e) {
    cond_err = e;
  }
  pos_ = save;
  try {
    expect("(");
    Process left = process();
    if (accept(")")) return left;
    expect("|");
    Rational prob = rational_literal();
    expect("|");
    Process right = process();
    expect(")");
    return Process::pchoice(left, prob, right);
  } catch (const ParseError& e) {
    // report whichever reading got further
    if (std::pair(cond_err->line(), cond_err->column()) > std::pair(e.line(), e.column())) throw *cond_err;
    throw;
  }
}

Process Grammar::brace_unit() {
  if (at_ident("d", 1) && at_sym("[", 2)) {
    SdeBlock block = sde_block();
    if (!accept("|>")) return Process::sde(std::move(block));
    expect("[");
    std::vector<Process::Branch> branches{branch()};
    while (accept(",")) branches.push_back(branch());
    expect("]");
    return Process::interrupt(std::move(block), std::move(branches));
  }
  expect("{");
  Process body = process();
  expect("}");
  if (accept("*")) return Process::repeat(body);
  return body;
}

Rational Grammar::rational_literal() {
  const Token& t = peek();
  if (t.kind != TokKind::Number) fail("expected numeric literal, found " + describe(t));
  ++pos_;
  Rational r = parse_rational(t.text);
  if (at_sym("/") && peek(1).kind == TokKind::Number) {
    ++pos_;
    Rational d = parse_rational(peek().text);
    if (d == 0) fail("division by zero in literal");
    ++pos_;
    r /= d;
  }
  return r;
}

Process::Branch Grammar::branch() {
  Rational w = rational_literal();
  expect(":");
  const Token& ct = peek();
  std::string chan = expect_ident("channel name");
  if (is_reserved_word(chan)) fail_at(ct, "unexpected keyword '" + chan + "'");
  CommEvent ev = CommEvent::input(chan, "");
  if (accept("?")) {
    ev = CommEvent::input(chan, expect_ident("variable"));
  } else {
    expect("!");
    ev = CommEvent::output(chan, expr());
  }
  expect("->");
  expect("{");
  Process body = process();
  expect("}");
  return Process::Branch{w, std::move(ev), body};
}

std::size_t Grammar::find_scaled_vector(std::string_view stop) const {
  int depth = 0;
  for (std::size_t i = pos_; i < limit_; ++i) {
    const Token& t = toks_[i];
    if (t.kind == TokKind::End) break;
    if (depth == 0 && t.kind == TokKind::Ident && t.text == stop) break;
    if (t.kind != TokKind::Sym) continue;
    if (t.text == "(" || t.text == "[") ++depth;
    if (t.text == ")" || t.text == "]") {
      if (depth == 0) break;
      --depth;
    }
    if (depth == 0 && t.text == "*" && i + 1 < limit_ && toks_[i + 1].kind == TokKind::Sym && toks_[i + 1].text == "[") {
      return i;
    }
    if (depth == 0 && (t.text == "}" || t.text == ";")) break;
  }
  return 0;
}

std::vector<Expr> Grammar::drift(std::size_t d) {
  const Token& start = peek();
  std::vector<Expr> out;
  if (at_sym("[")) {
    out = bracket_list();
  } else if (std::size_t star = find_scaled_vector("dt"); star != 0) {
    const std::size_t saved_limit = limit_;
    set_limit(star);
    Expr scale = expr();
    if (!at_end()) fail("unexpected " + describe(peek()) + " in drift scale");
    set_limit(saved_limit);
    expect("*");
    for (const Expr& e : bracket_list()) out.push_back(Expr::binary(BinaryOp::Mul, scale, e));
  } else {
    out.push_back(expr());
  }
  if (out.size() != d) {
    fail_at(start, "malformed SDE block: drift has " + std::to_string(out.size()) + " component(s) for " +
                       std::to_string(d) + " variable(s)");
  }
  return out;
}

std::vector<std::vector<Expr>> Grammar::diffusion(std::size_t d) {
  const Token& start = peek();
  std::vector<std::vector<Expr>> rows;
  std::size_t n = 0;
  if (start.kind == TokKind::Ident && is_identity_name(start.text, n) && at_ident("dW", 1)) {
    ++pos_;
    if (n != d) {
      fail_at(start, "malformed SDE block: " + start.text + " for " + std::to_string(d) + " variable(s)");
    }
    for (std::size_t i = 0; i < n; ++i) {
      rows.emplace_back();
      for (std::size_t j = 0; j < n; ++j) rows.back().push_back(Expr::constant(i == j ? 1L : 0L));
    }
    return rows;
  }
  if (at_sym("[") && at_sym("[", 1)) {
    expect("[");
    rows.push_back(bracket_list());
    while (accept(",")) rows.push_back(bracket_list());
    expect("]");
    for (const auto& r : rows) {
      if (r.size() != rows.front().size()) fail_at(start, "malformed SDE block: ragged diffusion matrix");
    }
  } else if (at_sym("[")) {
    for (Expr& e : bracket_list()) rows.push_back({e});
  } else if (std::size_t star = find_scaled_vector("dW"); star != 0) {
    const std::size_t saved_limit = limit_;
    set_limit(star);
    Expr scale = expr();
    if (!at_end()) fail("unexpected " + describe(peek()) + " in diffusion scale");
    set_limit(saved_limit);
    expect("*");
    for (const Expr& e : bracket_list()) rows.push_back({Expr::binary(BinaryOp::Mul, scale, e)});
  } else {
    rows.push_back({expr()});
  }
  if (rows.size() != d) {
    fail_at(start, "malformed SDE block: diffusion has " + std::to_string(rows.size()) + " row(s) for " +
                       std::to_string(d) + " variable(s)");
  }
  return rows;
}

SdeBlock Grammar::sde_block() {
  expect("{");
  ++pos_;  // d
  expect("[");
  SdeBlock block;
  const Token& first = peek();
  block.vars.push_back(expect_ident("variable"));
  while (accept(",")) block.vars.push_back(expect_ident("variable"));
  expect("]");
  for (const auto& v : block.vars) {
    if (is_reserved_word(v) || v == "now") fail_at(first, "unexpected keyword '" + v + "'");
    if (defs_.count(v)) fail_at(first, "cannot evolve definition '" + v + "'");
  }
  expect("=");
  block.drift = drift(block.vars.size());
  if (!at_ident("dt")) fail("expected 'dt', found " + describe(peek()));
  ++pos_;
  expect("+");
  block.diffusion = diffusion(block.vars.size());
  if (!at_ident("dW")) fail("expected 'dW', found " + describe(peek()));
  ++pos_;
  expect("&");
  block.domain = bool_expr();
  expect("}");
  return block;
}

}  // namespace detail

Process parse(std::string_view text) {
  detail::Grammar g(detail::tokenize(text));
  g.parse_defs();
  Process p = g.process();
  if (!g.at_end()) g.fail("unexpected " + std::string("'") + g.peek().text + "' after process");
  return p;
}

namespace {

detail::Grammar with_defs(std::string_view text, std::string_view defs) {
  detail::Grammar g(detail::tokenize(text));
  if (!defs.empty()) {
    detail::Grammar d(detail::tokenize(defs));
    d.parse_defs();
    for (const auto& [name, e] : d.defs()) g.add_def(name, e);
  }
  return g;
}

}  // namespace

Expr parse_expr(std::string_view text, std::string_view defs) {
  detail::Grammar g = with_defs(text, defs);
  Expr e = g.expr();
  if (!g.at_end()) g.fail("unexpected '" + g.peek().text + "' after expression");
  return e;
}

BoolExpr parse_bool_expr(std::string_view text, std::string_view defs) {
  detail::Grammar g = with_defs(text, defs);
  BoolExpr b = g.bool_expr();
  if (!g.at_end()) g.fail("unexpected '" + g.peek().text + "' after expression");
  return b;
}

namespace {

const SdeBlock* find_block(const Process& p) {
  return std::visit(
      [](const auto& n) -> const SdeBlock* {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, proc::Sde> || std::is_same_v<T, proc::Interrupt>) {
          return &n.block;
        } else if constexpr (std::is_same_v<T, proc::Seq>) {
          if (auto* b = find_block(n.first)) return b;
          return find_block(n.second);
        } else if constexpr (std::is_same_v<T, proc::Parallel>) {
          if (auto* b = find_block(n.left)) return b;
          return find_block(n.right);
        } else if constexpr (std::is_same_v<T, proc::PChoice>) {
          if (auto* b = find_block(n.left)) return b;
          return find_block(n.right);
        } else if constexpr (std::is_same_v<T, proc::Cond> || std::is_same_v<T, proc::Repeat>) {
          return find_block(n.body);
        } else {
          return nullptr;
        }
      },
      p.node().value);
}

}  // namespace

SdeBlock first_sde_block(const Process& p) {
  const SdeBlock* b = find_block(p);
  if (b == nullptr) throw std::invalid_argument("program contains no SDE block");
  return *b;
}

}  // namespace shcsp
