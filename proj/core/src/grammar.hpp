#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lexer.hpp"
#include "shcsp/expr.hpp"
#include "shcsp/process.hpp"

namespace shcsp::detail {

/// Recursive-descent parser over a token vector, shared by the program and
/// formula front ends.
class Grammar {
 public:
  explicit Grammar(std::vector<Token> tokens) : toks_(std::move(tokens)) { set_limit(toks_.size() - 1); }

  // formula front end: `now` is a term, any identifier may name a logical variable
  bool allow_now = false;

  const Token& peek(std::size_t ahead = 0) const;
  bool at_sym(std::string_view s, std::size_t ahead = 0) const;
  bool at_ident(std::string_view s, std::size_t ahead = 0) const;
  bool at_end() const { return peek().kind == TokKind::End; }
  bool accept(std::string_view sym);
  void expect(std::string_view sym);
  std::string expect_ident(std::string_view what);
  [[noreturn]] void fail(const std::string& message) const;
  [[noreturn]] void fail_at(const Token& t, const std::string& message) const;

  std::size_t pos() const { return pos_; }
  void reset(std::size_t pos) { pos_ = pos; }

  void parse_defs();
  const std::map<std::string, Expr>& defs() const { return defs_; }
  void add_def(const std::string& name, const Expr& e) { defs_[name] = e; }

  Expr expr();
  BoolExpr bool_expr();
  Process process();
  Rational rational_literal();
  static CmpOp cmp_of(std::string_view sym);
  bool at_cmp() const;

 private:
  Expr additive();
  Expr term();
  Expr unary();
  Expr power();
  Expr primary();
  Expr piecewise();
  std::vector<Expr> bracket_list();
  BoolExpr bool_or();
  BoolExpr bool_and();
  BoolExpr bool_not();
  BoolExpr bool_atom();
  Process seq();
  Process unit();
  Process cond();
  Process paren_unit();
  Process brace_unit();
  SdeBlock sde_block();
  std::vector<Expr> drift(std::size_t d);
  std::vector<std::vector<Expr>> diffusion(std::size_t d);
  Process::Branch branch();
  std::size_t find_scaled_vector(std::string_view stop) const;
  void set_limit(std::size_t limit);

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t limit_ = 0;
  Token sentinel_;
  std::map<std::string, Expr> defs_;
};

bool is_reserved_word(std::string_view s);

}  // namespace shcsp::detail
