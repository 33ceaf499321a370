#include <gtest/gtest.h>

#include <cmath>

#include "shcsp/parser.hpp"
#include "shcsp/sde.hpp"

using namespace shcsp;

TEST(Sde, EulerMaruyamaStepMatchesHandComputation) {
  const SdeBlock b = first_sde_block(parse("{d[x, y] = [y, -x] dt + [[x, 0], [0, 2]] dW & true}"));
  const auto out = em_step({1.0, 2.0}, b, {}, 0.1, {0.3, -0.5});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_DOUBLE_EQ(out[0], 1.0 + 2.0 * 0.1 + 1.0 * 0.3);
  EXPECT_DOUBLE_EQ(out[1], 2.0 - 1.0 * 0.1 + 2.0 * -0.5);
}

TEST(Sde, StepReadsParametersFromEnvironment) {
  const SdeBlock b = first_sde_block(parse("{d[s] = mu dt + sigma dW & true}"));
  const auto out = em_step({0.0}, b, {{"mu", 2.0}, {"sigma", 3.0}}, 0.5, {1.0});
  EXPECT_DOUBLE_EQ(out[0], 1.0 + 3.0);
}

TEST(Sde, BrownianIncrementVariance) {
  Rng rng(17);
  const int n = 100000;
  double s2 = 0;
  for (int i = 0; i < n; ++i) {
    const auto dw = brownian_increment(1, 0.25, rng);
    s2 += dw[0] * dw[0];
  }
  EXPECT_NEAR(s2 / n, 0.25, 0.005);
}

TEST(Sde, BisectionNarrowsToTolerance) {
  const double crossing = 0.3141592;
  const double hit = bisect_exit([&](double t) { return t < crossing; }, 1e-9);
  EXPECT_GE(hit, crossing);
  EXPECT_LE(hit - crossing, 1e-9);
}

TEST(Sde, NextGridTime) {
  EXPECT_DOUBLE_EQ(next_grid_time(0.0, 0.25, 10.0), 0.25);
  EXPECT_DOUBLE_EQ(next_grid_time(0.3, 0.25, 10.0), 0.5);
  EXPECT_DOUBLE_EQ(next_grid_time(9.9, 0.25, 10.0), 10.0);
}

TEST(Sde, EvolveDeterministicExit) {
  RunConfig cfg;
  cfg.dt = 0.1;
  ProcState entry;
  entry.vals = {{"s", 0.0}};
  Rng rng(1);
  const SdePath path = evolve(first_sde_block(parse("{d[s] = 1 dt + 0 dW & s < 1}")), entry, cfg, rng);
  EXPECT_EQ(path.exit, SdePath::Exit::Boundary);
  EXPECT_NEAR(path.exit_time, 1.0, 1e-8);
  for (std::size_t k = 0; k < path.times.size(); ++k) EXPECT_NEAR(path.states[k][0], path.times[k], 1e-12);
}

TEST(Sde, EvolveTimesOut) {
  RunConfig cfg;
  cfg.dt = 0.1;
  cfg.t_max = 2.0;
  ProcState entry;
  entry.vals = {{"s", 0.0}};
  Rng rng(1);
  const SdePath path = evolve(first_sde_block(parse("{d[s] = 0 dt + 1 dW & true}")), entry, cfg, rng);
  EXPECT_EQ(path.exit, SdePath::Exit::Timeout);
  EXPECT_DOUBLE_EQ(path.exit_time, 2.0);
}

TEST(Sde, EvolveStopsWhenPollReportsPartner) {
  RunConfig cfg;
  cfg.dt = 0.1;
  ProcState entry;
  entry.vals = {{"s", 0.0}};
  Rng rng(1);
  const SdePath path = evolve(first_sde_block(parse("{d[s] = 1 dt + 0 dW & s < 100}")), entry, cfg, rng,
                              [](double t, const std::vector<double>&) { return t >= 0.5 - 1e-12; });
  EXPECT_EQ(path.exit, SdePath::Exit::Interrupted);
  EXPECT_NEAR(path.exit_time, 0.5, 1e-9);
}

TEST(Sde, NonFiniteStateRaises) {
  RunConfig cfg;
  cfg.dt = 0.5;
  ProcState entry;
  entry.vals = {{"s", 1.0}};
  Rng rng(1);
  EXPECT_THROW(evolve(first_sde_block(parse("{d[s] = exp(exp(s^3)) dt + 0 dW & true}")), entry, cfg, rng),
               EvalError);
}

// Weak order of Euler-Maruyama on geometric Brownian motion: E[S_T] = s0 e^{mu T}.
TEST(Sde, GeometricBrownianMean) {
  const SdeBlock b = first_sde_block(parse("{d[s] = 0.5*s dt + 0.2*s dW & true}"));
  RunConfig cfg;
  cfg.dt = 1.0 / 64;
  cfg.t_max = 1.0;
  const int n = 20000;
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    ProcState entry;
    entry.vals = {{"s", 1.0}};
    Rng rng(derive_seed(8, static_cast<std::uint64_t>(i)));
    sum += evolve(b, entry, cfg, rng).exit_state[0];
  }
  EXPECT_NEAR(sum / n, std::exp(0.5), 0.02);
}
