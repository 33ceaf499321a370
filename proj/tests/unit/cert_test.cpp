#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "shcsp/cert.hpp"
#include "shcsp/parser.hpp"
#include "shcsp/printer.hpp"

using namespace shcsp;

namespace {

std::string simp(const std::string& text) { return to_string(simplify(parse_expr(text))); }
std::string d(const std::string& text, const std::string& v) { return to_string(diff(parse_expr(text), v)); }

const char* kAircraft =
    "def v = 1; def xs = 0; def xe = 5; def y0 = 0.1;\n"
    "def theta = if y > 0 then -pi/4 elif y = 0 then 0 else pi/4;\n"
    "x := xs; y := y0; {d[x, y] = v*[cos(theta), sin(theta)] dt + I2 dW & xs <= x & x <= xe}";

CertificateRequest contracting(const std::string& lam, const std::string& p, const std::string& s0) {
  CertificateRequest r;
  r.block = first_sde_block(parse("{d[s] = -s dt + 0.5 dW & s > 0.4}"));
  r.f = parse_expr("s^2");
  r.lam = parse_rational(lam);
  r.p = parse_rational(p);
  r.init = {{"s", parse_rational(s0)}};
  r.box = {{"s", {0.4, 5.0}}};
  r.grid = 201;
  return r;
}

}  // namespace

TEST(Simplify, CollectsLikeTerms) {
  EXPECT_EQ(simp("x + x"), "2*x");
  EXPECT_EQ(simp("x*0 + 1*y"), "y");
  EXPECT_EQ(simp("x - x"), "0");
  EXPECT_EQ(simp("2*x*y + y*x"), "3*x*y");
  EXPECT_EQ(simp("(x + 1)^2 - x^2 - 2*x"), "1");
  EXPECT_EQ(simp("x/2 + x/2"), "x");
  EXPECT_EQ(simp("3 + x"), "x + 3");
}

TEST(Diff, Polynomials) {
  EXPECT_EQ(d("x^3 - 2*x + x/2 - x*y", "x"), "3*x^2 - y - 1.5");
  EXPECT_EQ(d("y^2", "y"), "2*y");
  EXPECT_EQ(d("7", "x"), "0");
  EXPECT_EQ(d("y", "x"), "0");
}

TEST(Diff, ChainRule) {
  EXPECT_EQ(d("sin(th)*v", "th"), "v*cos(th)");
  EXPECT_EQ(d("exp(2*x)", "x"), "2*exp(2*x)");
}

TEST(Diff, NonSmoothNodesThrow) {
  for (const char* text : {"abs(y)", "sgn(y)", "min(y, 1)", "max(y, 0)", "if y > 0 then y else -y"}) {
    SCOPED_TRACE(text);
    EXPECT_THROW(diff(parse_expr(text), "y"), NonDifferentiable);
  }
  EXPECT_EQ(d("abs(z) + y", "y"), "1");
}

TEST(Diff, OffSingularCollectsSingularSet) {
  const OffSingular r = diff_off_singular(parse_expr("abs(y)"), "y");
  EXPECT_EQ(to_string(r.value), "sgn(y)");
  ASSERT_EQ(r.singular.size(), 1u);
  EXPECT_EQ(to_string(r.singular[0]), "y");
}

// The derivative is checked against central differences rather than a
// symbolic oracle.
TEST(Diff, MatchesFiniteDifferences) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const char* text : {"x^3*y - sin(x*y)", "exp(x)/(1 + y^2)", "cos(x + 2*y)^2", "sqrt(x^2 + 1)*y",
                           "(x - y)^4 / (2 + sin(x))"}) {
    SCOPED_TRACE(text);
    const Expr e = parse_expr(text);
    for (const std::string v : {"x", "y"}) {
      const Expr de = diff(e, v);
      for (int k = 0; k < 20; ++k) {
        Valuation env{{"x", u(rng)}, {"y", u(rng)}};
        const double h = 1e-6;
        Valuation up = env, down = env;
        up[v] += h;
        down[v] -= h;
        const double num = (evaluate(e, up) - evaluate(e, down)) / (2 * h);
        EXPECT_NEAR(evaluate(de, env), num, 1e-6 * std::max(1.0, std::abs(num)));
      }
    }
  }
}

TEST(Lie, KnownGenerators) {
  const Process air = parse(kAircraft);
  const SdeBlock b = first_sde_block(air);
  EXPECT_EQ(to_string(lie_derivative(parse_expr("y^2", kAircraft), b)), "2*v*y*sin(theta) + 1");
  const SdeBlock one = first_sde_block(parse("{d[s] = mu dt + sigma0 dW & s < 1}"));
  EXPECT_EQ(to_string(lie_derivative(parse_expr("s"), one)), "mu");
  EXPECT_EQ(to_string(lie_derivative(parse_expr("3"), one)), "0");
  EXPECT_EQ(to_string(lie_derivative(parse_expr("s^2"), one)), "2*mu*s + sigma0^2");
}

TEST(Lie, IsLinearInF) {
  const SdeBlock b = first_sde_block(parse("{d[x, y] = [y, -x] dt + [[x, 1], [0, y]] dW & true}"));
  const Expr f = parse_expr("x^2*y");
  const Expr g = parse_expr("sin(x) + y^3");
  const Expr lhs = lie_derivative(Expr::constant(2L) * f + Expr::constant(3L) * g, b);
  const Expr rhs = simplify(Expr::constant(2L) * lie_derivative(f, b) + Expr::constant(3L) * lie_derivative(g, b));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 50; ++k) {
    Valuation env{{"x", u(rng)}, {"y", u(rng)}};
    EXPECT_NEAR(evaluate(lhs, env), evaluate(rhs, env), 1e-9);
  }
}

TEST(Lie, NonSmoothFunctionRaises) {
  const SdeBlock b = first_sde_block(parse(kAircraft));
  EXPECT_THROW(lie_derivative(parse_expr("abs(y)", kAircraft), b), NonDifferentiable);
  const OffSingular off = lie_derivative_off_singular(parse_expr("abs(y)", kAircraft), b);
  EXPECT_FALSE(off.singular.empty());
}

TEST(SignCheck, FindsFirstCounterexample) {
  const SignCheck c =
      check_sign(parse_expr("x - 0.5"), Sign::NonPos, BoolExpr::literal(true), {{"x", {0.0, 1.0}}}, 11);
  EXPECT_FALSE(c.passes);
  ASSERT_TRUE(c.counterexample);
  EXPECT_NEAR(c.counterexample->at("x"), 0.6, 1e-12);
  EXPECT_EQ(c.points, 11u);
}

TEST(SignCheck, RespectsDomainAndParameters) {
  const SignCheck c = check_sign(parse_expr("x - a"), Sign::NonNeg, parse_bool_expr("x >= 0.5"),
                                 {{"x", {0.0, 1.0}}}, 11, {{"a", 0.5}});
  EXPECT_TRUE(c.passes);
  EXPECT_EQ(c.in_domain, 6u);
}

TEST(SignCheck, ThreadsGiveSameAnswer) {
  const Expr e = parse_expr("x*y - 0.9");
  const Box box{{"x", {0.0, 1.0}}, {"y", {0.0, 1.0}}};
  const SignCheck one = check_sign(e, Sign::NonPos, BoolExpr::literal(true), box, 51, {}, {}, 1);
  const SignCheck four = check_sign(e, Sign::NonPos, BoolExpr::literal(true), box, 51, {}, {}, 4);
  EXPECT_EQ(one.passes, four.passes);
  EXPECT_EQ(*one.counterexample, *four.counterexample);
}

TEST(SdeRule, ContractingExampleCertifies) {
  const auto req = contracting("1", "0.25", "0.5");
  const CertificateResult r = check_sde_rule(req);
  EXPECT_EQ(r.verdict, CertificateResult::Verdict::Certified);
  EXPECT_TRUE(r.smooth);
  ASSERT_TRUE(r.implied_exact);
  EXPECT_EQ(*r.implied_exact, Rational(1, 4));
  for (const auto& p : r.premises) EXPECT_TRUE(p.passed) << p.name;
  EXPECT_NE(report(req, r).find("certified"), std::string::npos);
}

TEST(SdeRule, BoundBelowInitialValueRejects) {
  const CertificateResult r = check_sde_rule(contracting("1", "0.24", "0.5"));
  EXPECT_EQ(r.verdict, CertificateResult::Verdict::Rejected);
  EXPECT_EQ(r.rejected_premise, "initial");
}

TEST(SdeRule, GrowingFunctionFailsLiePremise) {
  auto req = contracting("1", "0.5", "0.5");
  req.block = first_sde_block(parse("{d[s] = s dt + 0.5 dW & s > 0.4}"));
  const CertificateResult r = check_sde_rule(req);
  EXPECT_EQ(r.verdict, CertificateResult::Verdict::Rejected);
  EXPECT_EQ(r.rejected_premise, "lie");
}

TEST(SdeRule, InitialStateOutsideDomainRejects) {
  const CertificateResult r = check_sde_rule(contracting("1", "1", "0.3"));
  EXPECT_EQ(r.verdict, CertificateResult::Verdict::Rejected);
  EXPECT_EQ(r.rejected_premise, "initial-domain");
}

TEST(SdeRule, AircraftAbsoluteValueThreshold) {
  const SdeBlock b = first_sde_block(parse(kAircraft));
  auto req = [&](const char* y0) {
    CertificateRequest r;
    r.block = b;
    r.f = parse_expr("abs(y)", kAircraft);
    r.lam = 1;
    r.p = parse_rational("0.0002");
    r.init = {{"x", 0}, {"y", parse_rational(y0)}};
    r.box = {{"x", {0.0, 5.0}}, {"y", {-2.0, 2.0}}};
    r.grid = 21;
    return check_sde_rule(r);
  };
  const auto edge = req("0.0002");
  EXPECT_EQ(edge.verdict, CertificateResult::Verdict::Unsupported);
  EXPECT_TRUE(edge.partial_evidence);
  EXPECT_FALSE(edge.smooth);
  const auto over = req("0.00025");
  EXPECT_EQ(over.verdict, CertificateResult::Verdict::Rejected);
  EXPECT_EQ(over.rejected_premise, "initial");
}

TEST(SdeRule, RequestValidation) {
  auto r = contracting("0", "0.5", "0.5");
  EXPECT_THROW(r.check(), std::invalid_argument);
  r = contracting("1", "0.5", "0.5");
  r.init.clear();
  EXPECT_THROW(r.check(), std::invalid_argument);
}

TEST(Hoare, SdeBoundFromCertifiedRequest) {
  const auto req = contracting("1", "0.25", "0.5");
  const auto res = check_sde_rule(req);
  const HoareBound b = sde_bound(req, res);
  EXPECT_EQ(to_string(b.pre), "s = 0.5");
  EXPECT_EQ(to_string(b.post), "s >= 0.4");
  ASSERT_TRUE(b.event);
  EXPECT_EQ(to_string(*b.event), "s^2 >= 1");
  EXPECT_DOUBLE_EQ(b.bound, 0.25);
  EXPECT_THROW(sde_bound(req, check_sde_rule(contracting("1", "0.2", "0.5"))), CompositionError);
}

TEST(Hoare, AssignmentSubstitutes) {
  const HoareBound b = assign_bound("s", parse_expr("0.5"), parse_bool_expr("s = 0.5"));
  EXPECT_EQ(to_string(b.pre), "0.5 = 0.5");
}

TEST(Hoare, ChoiceMixesBounds) {
  const HoareBound a = sde_bound(contracting("1", "0.25", "0.5"), check_sde_rule(contracting("1", "0.25", "0.5")));
  HoareBound c = a;
  c.bound = 0.75;
  const HoareBound m = combine_pchoice(a, c, Rational(1, 4));
  EXPECT_DOUBLE_EQ(m.bound, 0.25 * 0.25 + 0.75 * 0.75);
  HoareBound other = a;
  other.event = parse_bool_expr("s >= 2");
  EXPECT_THROW(combine_pchoice(a, other, Rational(1, 2)), CompositionError);
}

TEST(Hoare, ConditionalTakesWeakerBranch) {
  const auto req = contracting("1", "0.25", "0.5");
  const HoareBound a = sde_bound(req, check_sde_rule(req));
  HoareBound skip = skip_bound(a.pre);
  skip.event = a.event;
  skip.bound = 0.0;
  const HoareBound c = cond_bound(parse_bool_expr("s > 0.45"), a, skip);
  EXPECT_DOUBLE_EQ(c.bound, 0.25);
}

TEST(Hoare, SequenceNeedsEntailedPrecondition) {
  const auto req = contracting("1", "0.25", "0.5");
  const HoareBound sde = sde_bound(req, check_sde_rule(req));
  const HoareBound init = assign_bound("s", parse_expr("0.5"), parse_bool_expr("s = 0.5"));
  const HoareBound seq = chain_seq(init, sde);
  EXPECT_DOUBLE_EQ(seq.bound, 0.25);
  EXPECT_GE(seq.provenance.size(), 3u);
  const HoareBound wrong = assign_bound("s", parse_expr("0.6"), parse_bool_expr("s = 0.6"));
  EXPECT_THROW(chain_seq(wrong, sde), CompositionError);
}

TEST(Hoare, EntailmentIsConjunctInclusion) {
  EXPECT_TRUE(entails(parse_bool_expr("a > 0 & b > 0"), parse_bool_expr("b > 0")));
  EXPECT_FALSE(entails(parse_bool_expr("a > 0"), parse_bool_expr("a > 0 & b > 0")));
}
