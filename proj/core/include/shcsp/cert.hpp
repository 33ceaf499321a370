#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "shcsp/eval.hpp"
#include "shcsp/expr.hpp"
#include "shcsp/process.hpp"

namespace shcsp {

/// Raised by diff when it meets abs, sgn, min, max or a piecewise
/// expression that depends on the differentiation variable.
class NonDifferentiable : public std::runtime_error {
 public:
  NonDifferentiable(const std::string& node, const std::string& var)
      : std::runtime_error("not differentiable: " + node + " with respect to " + var), node_(node) {}
  const std::string& node() const { return node_; }

 private:
  std::string node_;
};

/// Folds constants, drops 0 and 1 units and collects like terms of sums of
/// products. Factors print variables first, then calls; constants go last.
Expr simplify(const Expr& e);

/// Symbolic partial derivative, simplified.
Expr diff(const Expr& e, const std::string& var);

/// Derivative valid away from a singular set: |u|' = sgn(u) u', sgn' = 0,
/// min/max and piecewise differentiate the active branch. `singular` lists
/// expressions whose zeros make up the excluded set.
struct OffSingular {
  Expr value;
  std::vector<Expr> singular;
};
OffSingular diff_off_singular(const Expr& e, const std::string& var);

/// sum_i b_i df/ds_i + 1/2 sum_ij (sigma sigma^T)_ij d2f/ds_i ds_j, simplified.
Expr lie_derivative(const Expr& f, const SdeBlock& block);
OffSingular lie_derivative_off_singular(const Expr& f, const SdeBlock& block);

// ---------------------------------------------------------------- sign checks

enum class Sign { NonNeg, NonPos };

/// Closed interval per variable.
using Box = std::map<std::string, std::pair<double, double>>;

struct SignCheck {
  bool passes = true;
  std::optional<Valuation> counterexample;  // first failing grid point
  double value = 0.0;                       // e at the counterexample
  std::size_t points = 0;                   // grid points visited
  std::size_t in_domain = 0;                // points satisfying the domain
  std::size_t singular = 0;                 // skipped on the singular set
  double max_abs = 0.0;                     // largest |e| seen in the domain

  /// Always "grid evidence, not a proof".
  static constexpr const char* kMethod = "grid evidence, not a proof";
};

/// Evaluates e at every point of a `grid`-per-dimension lattice over `box`
/// that satisfies `domain` and avoids the zeros of `singular`. Variables
/// outside the box are read from `params`. Comparisons with zero are exact.
SignCheck check_sign(const Expr& e, Sign sign, const BoolExpr& domain, const Box& box, unsigned grid,
                     const Valuation& params = {}, const std::vector<Expr>& singular = {}, unsigned threads = 1);

// ---------------------------------------------------------------- SDE rule

struct CertificateRequest {
  SdeBlock block;
  Expr f;
  Rational lam;
  Rational p;
  std::map<std::string, Rational> init;  // initial state and constant parameters
  Box box;
  unsigned grid = 101;
  unsigned threads = 1;

  /// Throws std::invalid_argument unless lam > 0, p in [0, 1], grid >= 2 and
  /// the box is nonempty and covers every SDE variable.
  void check() const;
};

struct Premise {
  std::string name;    // smoothness, initial-domain, initial, nonneg, lie, bounded
  std::string method;  // how it was checked
  bool passed = true;
  std::string detail;  // witness or counterexample
};

struct CertificateResult {
  enum class Verdict { Certified, Rejected, Unsupported };

  Verdict verdict = Verdict::Unsupported;
  std::string rejected_premise;  // set when rejected
  std::string reason;            // set when unsupported
  bool smooth = true;            // false: f is not C2
  bool partial_evidence = false; // premises hold off the singular set
  std::vector<Premise> premises;
  double implied_bound = 0.0;            // f(s0) / lam
  std::optional<Rational> implied_exact; // when f(s0) evaluates exactly
  Expr lie;                              // Lf, or its off-singular form
  std::vector<Expr> singular;
  std::string conclusion;
  std::string postcondition;  // closure of the domain at exit
};

std::string_view verdict_name(CertificateResult::Verdict v);  // "certified", "rejected", "unsupported"

/// Smoothness, then the initial premise f(s0) <= lam * p, then the sign
/// premises f >= 0 and Lf <= 0 on the domain.
CertificateResult check_sde_rule(const CertificateRequest& req);

/// Human-readable listing of every premise, its method and witness.
std::string report(const CertificateRequest& req, const CertificateResult& res);

// ---------------------------------------------------------------- bound propagation

/// `{pre} statement {post}` together with a claim P(event) rel bound.
struct HoareBound {
  Process statement;
  BoolExpr pre;
  BoolExpr post;
  std::optional<BoolExpr> event;  // no claim for skip and assignment
  CmpOp rel = CmpOp::Le;
  double bound = 1.0;
  std::vector<std::string> provenance;
};

class CompositionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Triple for a certified SDE request: pre is the conjunction of s = s0,
/// post the closure of the domain and the claim P(f >= lam) <= p.
HoareBound sde_bound(const CertificateRequest& req, const CertificateResult& res);

HoareBound skip_bound(const BoolExpr& a);
/// `{A[e/x]} x := e {A}`.
HoareBound assign_bound(const std::string& var, const Expr& e, const BoolExpr& post);
/// `B -> {P}`: the claim is the weaker of the two branches; the else branch is skip.
HoareBound cond_bound(const BoolExpr& guard, const HoareBound& then_branch, const HoareBound& else_skip);
/// Bound p * bp + (1 - p) * bq for `(P |p| Q)`.
HoareBound combine_pchoice(const HoareBound& bp, const HoareBound& bq, const Rational& p);
/// `P; Q` when every conjunct of Q's precondition appears in P's postcondition.
HoareBound chain_seq(const HoareBound& b1, const HoareBound& b2);

/// Conservative syntactic entailment: every conjunct of `goal` is a
/// conjunct of `from`.
bool entails(const BoolExpr& from, const BoolExpr& goal);

}  // namespace shcsp
