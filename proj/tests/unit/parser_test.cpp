#include <gtest/gtest.h>

#include <random>

#include "shcsp/eval.hpp"
#include "shcsp/parser.hpp"
#include "shcsp/printer.hpp"
#include "shcsp/validate.hpp"

using namespace shcsp;

namespace {

void expect_round_trip(const std::string& text) {
  const Process p = parse(text);
  const std::string printed = pretty(p);
  EXPECT_EQ(parse(printed), p) << text << "\nprinted as\n" << printed;
  EXPECT_EQ(pretty(parse(printed)), printed);
}

}  // namespace

TEST(Parser, RoundTripsEveryConstruct) {
  for (const char* text : {
           "skip",
           "x := 2 + 3",
           "ch!x + 1 || ch?y",
           "x := 0; {x := x + 1}*",
           "(x := 1 |0.25| x := 2)",
           "(x := 1 |1/3| (y := 1 |0.5| y := 2))",
           "(x > 2) -> {y := 1}",
           "(x > 2 & !(y = 1)) -> {y := 1; z := 2}",
           "{d[s] = -s dt + 0.5 dW & s > 0.4}",
           "{d[x, y] = [1, 2] dt + [[1, 0], [0, 1]] dW & x < 1 | y < 1}",
           "{d[x, y] = [1, 2] dt + [1, 0] dW & true}",
           "{d[t] = 1 dt + 0 dW & t < 10} |> [1: a?u -> {skip}, 3: b!2 -> {c!1}]",
           "x := -(-1); y := x^3 - 2*x/(1 + x^2); z := -x^2",
           "x := sin(pi/4) + cos(0) + exp(1) + sqrt(2) + abs(-1) + sgn(-2) + min(1, 2) + max(1, 2)",
       }) {
    SCOPED_TRACE(text);
    expect_round_trip(text);
  }
}

TEST(Parser, DefinitionsSurviveRoundTrip) {
  const std::string text =
      "def v = 1; def theta = if y > 0 then -pi/4 elif y = 0 then 0 else pi/4;\n"
      "x := 0; y := 0.1; {d[x, y] = v*[cos(theta), sin(theta)] dt + I2 dW & 0 <= x & x <= 5}";
  expect_round_trip(text);
  const std::string printed = pretty(parse(text));
  EXPECT_NE(printed.find("def theta"), std::string::npos);
}

TEST(Parser, ScaledVectorDriftExpands) {
  const SdeBlock b = first_sde_block(parse("{d[x, y] = 2*[1, x] dt + I2 dW & true}"));
  ASSERT_EQ(b.drift.size(), 2u);
  EXPECT_EQ(to_string(b.drift[1]), "2*x");
  ASSERT_EQ(b.diffusion.size(), 2u);
  EXPECT_EQ(b.diffusion[0].size(), 2u);
}

TEST(Parser, ErrorsCarryPositions) {
  try {
    parse("x := 1;\ny := ");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_GE(e.column(), 5);
  }
  EXPECT_THROW(parse("(skip |0.5 skip)"), ParseError);
  EXPECT_THROW(parse("x := foo(1)"), ParseError);
  EXPECT_THROW(parse("{d[x, y] = [1] dt + I2 dW & true}"), ParseError);
  EXPECT_THROW(parse("{d[x] = 1 dt + I2 dW & true}"), ParseError);
  EXPECT_THROW(parse("def c = 1; c := 2"), ParseError);
  EXPECT_THROW(parse("x := 1 y := 2"), ParseError);
}

TEST(Parser, CommentsAreIgnored) {
  EXPECT_EQ(parse("# heading\nx := 1 // trailing\n; y := 2"), parse("x := 1; y := 2"));
}

TEST(Parser, PChoiceKeepsExactProbability) {
  const Process p = parse("(skip |1/3| skip)");
  const auto& node = std::get<proc::PChoice>(p.node().value);
  EXPECT_EQ(node.prob, Rational(1, 3));
}

TEST(Validate, RejectsSharedVariablesAcrossParallel) {
  EXPECT_FALSE(validate(parse("x := 1 || x := 2")).empty());
  EXPECT_TRUE(validate(parse("x := 1 || y := 2")).empty());
}

TEST(Validate, RejectsBadProbabilities) {
  EXPECT_FALSE(validate(Process::pchoice(Process::skip(), Rational(3, 2), Process::skip())).empty());
}

TEST(Eval, ExpressionsEvaluate) {
  const Expr e = parse_expr("x^2 + 2*x*y - y/4 + sin(0)");
  EXPECT_DOUBLE_EQ(evaluate(e, {{"x", 3.0}, {"y", 2.0}}), 9.0 + 12.0 - 0.5);
  EXPECT_THROW(evaluate(e, {{"x", 1.0}}), EvalError);
  EXPECT_TRUE(evaluate(parse_bool_expr("x < 1 | y > 2 & !(x = 0)"), {{"x", 0.5}, {"y", 0.0}}));
}

TEST(Eval, PiecewiseTakesFirstMatchingBranch) {
  const Expr e = parse_expr("if x > 0 then 1 elif x = 0 then 0 else -1");
  EXPECT_EQ(evaluate(e, {{"x", 3.0}}), 1.0);
  EXPECT_EQ(evaluate(e, {{"x", 0.0}}), 0.0);
  EXPECT_EQ(evaluate(e, {{"x", -3.0}}), -1.0);
}

TEST(Eval, ExactArithmeticOnRationals) {
  const auto v = evaluate_exact(parse_expr("abs(y) / 2"), {{"y", Rational(-1, 5000)}});
  ASSERT_TRUE(v);
  EXPECT_EQ(*v, Rational(1, 10000));
  EXPECT_FALSE(evaluate_exact(parse_expr("sin(y)"), {{"y", Rational(1)}}));
}

TEST(Rational, ParsesDecimalsExactly) {
  EXPECT_EQ(parse_rational("0.0002"), Rational(1, 5000));
  EXPECT_EQ(parse_rational("1e-3"), Rational(1, 1000));
  EXPECT_EQ(rational_literal(Rational(1, 3)), "1/3");
  EXPECT_EQ(rational_literal(Rational(1, 4)), "0.25");
}

TEST(Rational, ExactRationalOfDoubleIsExact) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-1e6, 1e6);
  for (int i = 0; i < 200; ++i) {
    const double v = dist(rng);
    EXPECT_EQ(to_double(exact_rational(v)), v);
  }
}
