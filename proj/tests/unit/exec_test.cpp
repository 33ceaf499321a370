#include <gtest/gtest.h>

#include <cmath>

#include "shcsp/exec.hpp"
#include "shcsp/parser.hpp"
#include "shcsp/printer.hpp"
#include "shcsp/rng.hpp"
#include "shcsp/trace.hpp"

using namespace shcsp;

namespace {

RunRecord run_text(const std::string& text, std::uint64_t seed = 1, RunConfig cfg = {}) {
  return run(parse(text), {}, seed, cfg);
}

std::vector<std::string> comm_labels(const TimedTrace& t) {
  std::vector<std::string> out;
  for (const auto& i : t) {
    if (i.is_comm()) out.push_back(i.chan + "." + format_double(i.value));
  }
  return out;
}

}  // namespace

TEST(Trace, MergeKeepsTimeOrder) {
  const TimedTrace a{TimedItem::comm("a", 1, 0.0), TimedItem::comm("a", 2, 2.0)};
  const TimedTrace b{TimedItem::comm("b", 1, 1.0)};
  const auto merged = merge_traces(a, b, {});
  ASSERT_EQ(merged.size(), 1u);
  EXPECT_EQ(merged[0], (TimedTrace{a[0], b[0], a[1]}));
}

TEST(Trace, MergeEqualTimesInterleaveBothWays) {
  const TimedTrace a{TimedItem::comm("a", 1, 0.0)};
  const TimedTrace b{TimedItem::comm("b", 1, 0.0)};
  EXPECT_EQ(merge_traces(a, b, {}).size(), 2u);
}

TEST(Trace, SyncChannelsMustAgree) {
  const TimedTrace a{TimedItem::comm("c", 1, 0.0)};
  EXPECT_EQ(merge_traces(a, a, {"c"}).size(), 1u);
  EXPECT_TRUE(merge_traces(a, {TimedItem::comm("c", 2, 0.0)}, {"c"}).empty());
  EXPECT_TRUE(merge_traces(a, {}, {"c"}).empty());
}

TEST(Trace, InternalItemsStayPrivate) {
  const TimedTrace a{TimedItem::internal(0.0)};
  const TimedTrace b{TimedItem::internal(0.0)};
  const auto merged = merge_traces(a, b, {});
  ASSERT_EQ(merged.size(), 1u);
  EXPECT_EQ(merged[0].size(), 2u);
}

TEST(Trace, MergeStatesChecksParallelability) {
  ProcState a, b;
  a.vals = {{"x", 1}};
  b.vals = {{"x", 2}};
  EXPECT_THROW(merge_states(a, b), MergeError);
  b.vals = {{"y", 2}};
  b.now = 1.0;
  EXPECT_THROW(merge_states(a, b), MergeError);
  b.now = 0.0;
  const ProcState m = merge_states(a, b);
  EXPECT_EQ(m.vals.size(), 2u);
}

TEST(Rng, SeedsAreReproducibleAndDistinct) {
  EXPECT_EQ(derive_seed(42, 7), derive_seed(42, 7));
  EXPECT_NE(derive_seed(42, 7), derive_seed(42, 8));
  EXPECT_NE(stream_seed(5, 0), stream_seed(5, 1));
  Rng a(9), b(9);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.uniform(), b.uniform());
}

TEST(Rng, UniformAndNormalMoments) {
  Rng r(123);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = r.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(sn / n, 0.0, 0.01);
  EXPECT_NEAR(sn2 / n, 1.0, 0.02);
}

TEST(Exec, AssignmentSetsValue) {
  const RunRecord r = run_text("x := 2 + 3");
  EXPECT_EQ(r.exit, ExitKind::Terminated);
  EXPECT_EQ(r.final.vals.at("x"), 5.0);
}

TEST(Exec, CommunicationTransfersValue) {
  const RunRecord r = run_text("ch!7 || ch?y");
  EXPECT_EQ(r.exit, ExitKind::Terminated);
  EXPECT_EQ(r.final.vals.at("y"), 7.0);
  EXPECT_EQ(comm_labels(r.trace), std::vector<std::string>{"ch.7"});
  ASSERT_EQ(r.local_traces.size(), 2u);
}

TEST(Exec, RelayPassesValuesAlong) {
  const RunRecord r = run_text("in!4 || in?a; mid!a*2 || mid?b; out!b + 1 || out?c");
  EXPECT_EQ(r.final.vals.at("c"), 9.0);
  EXPECT_EQ(comm_labels(r.trace), (std::vector<std::string>{"in.4", "mid.8", "out.9"}));
}

TEST(Exec, LocalTracesMergeIntoGlobal) {
  const RunRecord r = run_text("a!1; b!2 || a?x; c!3 || b?y || c?z", 11);
  const auto merged = merge_traces(project(r.local_traces[0], {"a", "b"}), project(r.local_traces[1], {"a", "c"}),
                                   {"a"});
  ASSERT_FALSE(merged.empty());
}

TEST(Exec, UnmatchedInputDeadlocksWithPartner) {
  const RunRecord r = run_text("ch?y || d?z; ch!1");
  EXPECT_EQ(r.exit, ExitKind::Deadlock);
}

TEST(Exec, ExternalWaitTimesOut) {
  RunConfig cfg;
  cfg.t_max = 3.0;
  const RunRecord r = run_text("ch?y", 1, cfg);
  EXPECT_EQ(r.exit, ExitKind::Timeout);
  EXPECT_EQ(r.final.now, 3.0);
}

TEST(Exec, FixedRepeatCount) {
  RunConfig cfg;
  cfg.repeat = RepeatPolicy::fixed(4);
  EXPECT_EQ(run_text("x := 0; {x := x + 1}*", 1, cfg).final.vals.at("x"), 4.0);
  cfg.repeat = RepeatPolicy::fixed(0);
  EXPECT_EQ(run_text("x := 0; {x := x + 1}*", 1, cfg).final.vals.at("x"), 0.0);
}

TEST(Exec, GeometricRepeatMean) {
  // count N with P(N >= k+1 | N >= k) = q has mean q / (1 - q)
  RunConfig cfg;
  cfg.repeat = RepeatPolicy::geometric(0.5);
  const Process p = parse("x := 0; {x := x + 1}*");
  double sum = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) sum += run(p, {}, derive_seed(3, static_cast<std::uint64_t>(i)), cfg).final.vals.at("x");
  EXPECT_NEAR(sum / n, 1.0, 0.05);
}

TEST(Exec, StepLimitIsReported) {
  RunConfig cfg;
  cfg.repeat = RepeatPolicy::fixed(1000000);
  cfg.max_instant_steps = 100;
  EXPECT_EQ(run_text("x := 0; {x := x + 1}*", 1, cfg).exit, ExitKind::StepLimit);
}

TEST(Exec, ConditionalSkipsFalseGuard) {
  const RunRecord r = run_text("x := 3; (x > 2) -> {y := 1}; (x <= 2) -> {y := 2}");
  EXPECT_EQ(r.final.vals.at("y"), 1.0);
}

TEST(Exec, PChoiceExtremes) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    EXPECT_EQ(run_text("(x := 1 |1| x := 2)", s).final.vals.at("x"), 1.0);
    EXPECT_EQ(run_text("(x := 1 |0| x := 2)", s).final.vals.at("x"), 2.0);
  }
}

TEST(Exec, PChoiceBranchIsExactAtBoundary) {
  EXPECT_EQ(pchoice_branch(Rational(1, 4), 0.25), Side::Left);
  EXPECT_EQ(pchoice_branch(Rational(1, 4), std::nextafter(0.25, 1.0)), Side::Right);
}

TEST(Exec, WeightedPickUsesExactCumulativeWeights) {
  const std::vector<Rational> w{Rational(1), Rational(3)};
  EXPECT_EQ(weighted_pick(w, 0.0), 0u);
  EXPECT_EQ(weighted_pick(w, std::nextafter(0.25, 0.0)), 0u);
  EXPECT_EQ(weighted_pick(w, 0.25), 1u);
  EXPECT_EQ(weighted_pick(w, 0.999), 1u);
}

TEST(Exec, DeterministicSdeExitsAtBoundary) {
  RunConfig cfg;
  cfg.dt = 0.01;
  const RunRecord r = run_text("x := 0; {d[x] = 2 dt + 0 dW & x < 1}", 1, cfg);
  EXPECT_EQ(r.exit, ExitKind::Terminated);
  EXPECT_NEAR(r.final.now, 0.5, 1e-6);
  EXPECT_NEAR(r.final.vals.at("x"), 1.0, 1e-6);
}

TEST(Exec, SdeTimesOutAtHorizon) {
  RunConfig cfg;
  cfg.t_max = 0.0;
  EXPECT_EQ(run_text("s := 0; {d[s] = 0 dt + 1 dW & true}", 1, cfg).exit, ExitKind::Timeout);
}

TEST(Exec, InterruptFiresWhenPartnerIsReady) {
  const RunRecord r = run_text(
      "x := 0; {d[x] = 1 dt + 0 dW & x < 100} |> [1: ch?y -> {z := y}] || t := 0; {d[t] = 1 dt + 0 dW & t < 2}; ch!7");
  EXPECT_EQ(r.exit, ExitKind::Terminated);
  EXPECT_EQ(r.final.vals.at("z"), 7.0);
  EXPECT_NEAR(r.final.now, 2.0, 1e-6);
  EXPECT_NEAR(r.final.vals.at("x"), 2.0, 1e-6);
}

TEST(Exec, SameSeedSameRun) {
  const Process p = parse("x := 0; y := 0.1; {d[x, y] = [1, 0] dt + I2 dW & x < 1 & y < 1 & y > -1}");
  const RunRecord a = run(p, {}, 99, {});
  const RunRecord b = run(p, {}, 99, {});
  EXPECT_EQ(a.final, b.final);
  EXPECT_EQ(a.flow.size(), b.flow.size());
  EXPECT_NE(run(p, {}, 100, {}).final, a.final);
}

TEST(Exec, MachineStepsMatchRun) {
  const Process p = parse("x := 1; y := x + 1; ch!y || ch?z");
  Machine m(p, ProcState{}, 5, RunConfig{});
  std::vector<std::string> labels;
  while (auto l = m.step()) labels.push_back(l->text());
  EXPECT_TRUE(m.finished());
  EXPECT_EQ(m.exit(), ExitKind::Terminated);
  EXPECT_EQ(m.state().vals.at("z"), 2.0);
  EXPECT_EQ(labels.back(), "ch.2");
  EXPECT_EQ(m.state(), run(p, {}, 5, {}).final);
}

TEST(Exec, RejectsInvalidProgram) {
  EXPECT_THROW(run_text("x := 1 || x := 2"), std::invalid_argument);
}

TEST(Exec, ExitNamesRoundTrip) {
  for (auto k : {ExitKind::Terminated, ExitKind::Timeout, ExitKind::Deadlock, ExitKind::StepLimit}) {
    EXPECT_EQ(exit_from_name(exit_name(k)), k);
  }
}
