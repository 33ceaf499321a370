#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "shcsp/config.hpp"
#include "shcsp/exec.hpp"
#include "shcsp/expr.hpp"
#include "shcsp/trace.hpp"

namespace shcsp {

// ---------------------------------------------------------------- terms

struct TraceNode;

/// Trace expression: `eps`, `tr`, `<ch.E, T>`, `h1 ++ h2`, `h*`.
/// An item's value or time may be the wildcard `_` (nullopt), which, like
/// star, is only allowed in patterns.
class TraceTerm {
 public:
  TraceTerm();  // eps
  explicit TraceTerm(std::shared_ptr<const TraceNode> node) : node_(std::move(node)) {}

  static TraceTerm epsilon();
  static TraceTerm history();  // tr
  static TraceTerm item(std::string chan, std::optional<Expr> value, std::optional<Expr> time);
  static TraceTerm concat(TraceTerm a, TraceTerm b);
  static TraceTerm star(TraceTerm a);

  const TraceNode& node() const { return *node_; }
  bool is_pattern() const;  // contains star or a wildcard

 private:
  std::shared_ptr<const TraceNode> node_;
};

namespace tt {
struct Epsilon {};
struct History {};
struct Item {
  std::string chan;
  std::optional<Expr> value;
  std::optional<Expr> time;
};
struct Concat {
  TraceTerm lhs;
  TraceTerm rhs;
};
struct Star {
  TraceTerm body;
};
}  // namespace tt

struct TraceNode {
  std::variant<tt::Epsilon, tt::History, tt::Item, tt::Concat, tt::Star> value;
};

/// Value terms are arithmetic expressions that may mention `now` and bound
/// logical variables.
using Term = std::variant<Expr, TraceTerm>;

// ---------------------------------------------------------------- state formulas

struct StateNode;

class StateFormula {
 public:
  StateFormula();  // false
  explicit StateFormula(std::shared_ptr<const StateNode> node) : node_(std::move(node)) {}

  static StateFormula falsum();
  static StateFormula verum();
  static StateFormula relation(Term lhs, CmpOp op, Term rhs);
  static StateFormula ready(TraceTerm h, std::string chan, Direction dir);
  static StateFormula negation(StateFormula s);
  static StateFormula disjunction(StateFormula a, StateFormula b);
  static StateFormula conjunction(StateFormula a, StateFormula b);

  const StateNode& node() const { return *node_; }

 private:
  std::shared_ptr<const StateNode> node_;
};

namespace sf {
struct Const {
  bool value;
};
struct Relation {
  Term lhs;
  CmpOp op;
  Term rhs;
};
struct Ready {
  TraceTerm prefix;
  std::string chan;
  Direction dir;
};
struct Not {
  StateFormula operand;
};
struct Or {
  StateFormula lhs;
  StateFormula rhs;
};
struct And {
  StateFormula lhs;
  StateFormula rhs;
};
}  // namespace sf

struct StateNode {
  std::variant<sf::Const, sf::Relation, sf::Ready, sf::Not, sf::Or, sf::And> value;
};

// ---------------------------------------------------------------- formulas

struct FormulaNode;

class Formula {
 public:
  Formula();  // false
  explicit Formula(std::shared_ptr<const FormulaNode> node) : node_(std::move(node)) {}

  static Formula falsum();
  static Formula verum();
  static Formula holds_at(StateFormula s, Expr time);
  /// S holds at every recorded point of [t1, t2] (and at t1 itself).
  static Formula holds_during(StateFormula s, Expr t1, Expr t2);
  /// S holds at some recorded point of [t1, t2].
  static Formula holds_in(StateFormula s, Expr t1, Expr t2);
  static Formula negation(Formula f);
  static Formula disjunction(Formula a, Formula b);
  static Formula conjunction(Formula a, Formula b);
  static Formula forall_values(std::string var, std::vector<double> grid, Formula body);
  /// `var` ranges over t1 and every recorded time in [t1, t2].
  static Formula forall_times(std::string var, Expr t1, Expr t2, Formula body);

  const FormulaNode& node() const { return *node_; }

 private:
  std::shared_ptr<const FormulaNode> node_;
};

namespace fm {
struct Const {
  bool value;
};
struct HoldsAt {
  StateFormula state;
  Expr time;
};
struct HoldsDuring {
  StateFormula state;
  Expr from;
  Expr to;
};
struct HoldsIn {
  StateFormula state;
  Expr from;
  Expr to;
};
struct Not {
  Formula operand;
};
struct Or {
  Formula lhs;
  Formula rhs;
};
struct And {
  Formula lhs;
  Formula rhs;
};
struct ForallValues {
  std::string var;
  std::vector<double> grid;
  Formula body;
};
struct ForallTimes {
  std::string var;
  Expr from;
  Expr to;
  Formula body;
};
}  // namespace fm

struct FormulaNode {
  std::variant<fm::Const, fm::HoldsAt, fm::HoldsDuring, fm::HoldsIn, fm::Not, fm::Or, fm::And, fm::ForallValues,
               fm::ForallTimes>
      value;
};

// ---------------------------------------------------------------- probability formulas

/// `P(phi) op p` with op one of < <= >= >.
struct ProbBound {
  Formula formula;
  CmpOp op = CmpOp::Ge;
  Rational p;
};

struct ProbNode;

class ProbFormula {
 public:
  explicit ProbFormula(std::shared_ptr<const ProbNode> node) : node_(std::move(node)) {}

  static ProbFormula bound(ProbBound b);
  static ProbFormula negation(ProbFormula f);
  static ProbFormula disjunction(ProbFormula a, ProbFormula b);
  static ProbFormula conjunction(ProbFormula a, ProbFormula b);

  const ProbNode& node() const { return *node_; }

 private:
  std::shared_ptr<const ProbNode> node_;
};

namespace pf {
struct Bound {
  ProbBound bound;
};
struct Not {
  ProbFormula operand;
};
struct Or {
  ProbFormula lhs;
  ProbFormula rhs;
};
struct And {
  ProbFormula lhs;
  ProbFormula rhs;
};
}  // namespace pf

struct ProbNode {
  std::variant<pf::Bound, pf::Not, pf::Or, pf::And> value;
};

/// Bound atoms in left-to-right order.
std::vector<ProbBound> atoms(const ProbFormula& f);

// ---------------------------------------------------------------- text syntax

StateFormula parse_state_formula(std::string_view text);
Formula parse_formula(std::string_view text);
ProbFormula parse_prob_formula(std::string_view text);

std::string to_string(const TraceTerm& h);
std::string to_string(const StateFormula& s);
std::string to_string(const Formula& f);
std::string to_string(const ProbBound& b);
std::string to_string(const ProbFormula& f);

// ---------------------------------------------------------------- evaluation

/// Logical variable bindings for quantifiers.
using Bindings = std::map<std::string, double>;

using TermValue = std::variant<double, TimedTrace>;

/// Value terms see the state's variables, `now` and `logical` (which shadow
/// state variables). A trace term evaluates to the communication items only;
/// `tr` drops internal items.
TermValue eval_term(const Term& t, const ProcState& state, const Bindings& logical = {});

bool eval_state_formula(const StateFormula& s, const ProcState& state, const Bindings& logical = {});

/// Evaluates over a run's flow. Time terms use the final state, so `now` in
/// a time position is the time the run ended. Throws EvalError when a time
/// lies outside the flow.
bool eval_formula(const Formula& f, const RunRecord& rec);

/// Reusable evaluator for many runs of one program.
class FormulaEvaluator {
 public:
  explicit FormulaEvaluator(Formula f);
  ~FormulaEvaluator();
  FormulaEvaluator(FormulaEvaluator&&) noexcept;
  FormulaEvaluator& operator=(FormulaEvaluator&&) noexcept;

  bool operator()(const RunRecord& rec);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// ---------------------------------------------------------------- estimation

enum class Verdict { Holds, Fails, Inconclusive };

std::string_view verdict_name(Verdict v);  // "holds", "fails", "inconclusive"

struct Estimate {
  double phat = 0.0;
  std::size_t n = 0;          // runs that completed and were evaluated
  std::size_t successes = 0;  // runs where the formula held
  std::size_t failed = 0;     // runs that raised an error or hit the step limit
  double lo = 0.0;
  double hi = 1.0;
  Verdict verdict = Verdict::Inconclusive;
};

/// Half-width sqrt(ln(2/delta) / (2n)) of the two-sided Hoeffding interval.
double hoeffding_band(std::size_t n, double delta);

/// Interval phat +- band clipped to [0, 1] and the verdict for `op p`.
/// Holds/fails only when the whole interval is on one side of p, except that
/// `>= 1` and `<= 0` are decided by the absence of a counterexample and
/// `> 0` and `< 1` hold as soon as a witness is seen.
Estimate make_estimate(std::size_t successes, std::size_t n, std::size_t failed, double delta, CmpOp op,
                       const Rational& p);

struct EstimateOptions {
  std::size_t runs = 1000;
  double delta = 0.01;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: hardware concurrency
  RunConfig run;
};

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Monte Carlo estimate of P(phi) and its verdict against `op p`. Run i
/// uses seed derive_seed(opts.seed, i). Throws EstimationError when more
/// than 1% of runs fail.
Estimate estimate_prob(const ProbBound& b, const Process& program, const Valuation& init,
                       const EstimateOptions& opts);

struct ProbReport {
  std::vector<Estimate> atoms;  // same order as atoms(f)
  Verdict verdict = Verdict::Inconclusive;
};

/// Estimates every atom on one shared set of runs and combines the verdicts
/// with three-valued not/and/or.
ProbReport check_prob_formula(const ProbFormula& f, const Process& program, const Valuation& init,
                              const EstimateOptions& opts);

}  // namespace shcsp
