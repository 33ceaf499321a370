#include <benchmark/benchmark.h>

#include <filesystem>

#include "shcsp/assertion.hpp"
#include "shcsp/cert.hpp"
#include "shcsp/eval.hpp"
#include "shcsp/exec.hpp"
#include "shcsp/io.hpp"
#include "shcsp/parser.hpp"
#include "shcsp/rng.hpp"
#include "shcsp/sde.hpp"
#include "shcsp/trace.hpp"

using namespace shcsp;

namespace {

const std::filesystem::path kCorpus = SHCSP_CORPUS_DIR;

void BM_ParseAircraft(benchmark::State& state) {
  const std::string text = read_file(kCorpus / "aircraft.shcsp");
  for (auto _ : state) benchmark::DoNotOptimize(parse(text));
}
BENCHMARK(BM_ParseAircraft);

void BM_CompiledEval(benchmark::State& state) {
  const SymbolTable table({"x", "y", "z"});
  const CompiledExpr f = compile(parse_expr("sin(x)*y^2 + cos(z)/(1 + x^2) - 3*x*y*z"), table);
  const double slots[] = {0.3, -1.2, 2.5};
  for (auto _ : state) benchmark::DoNotOptimize(f(slots));
}
BENCHMARK(BM_CompiledEval);

void BM_EmStep(benchmark::State& state) {
  const SdeBlock b = first_sde_block(parse("{d[x, y] = [cos(t), sin(t)] dt + I2 dW & true}"));
  const Valuation env{{"t", 0.4}};
  const std::vector<double> s{0.0, 0.1};
  Rng rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(em_step(s, b, env, 1e-3, brownian_increment(2, 1e-3, rng)));
}
BENCHMARK(BM_EmStep);

TimedTrace alternating(const std::string& own, int n, double offset) {
  TimedTrace t;
  for (int i = 0; i < n; ++i) {
    t.push_back(TimedItem::comm("s", i, i));
    t.push_back(TimedItem::comm(own, i, i + offset));
  }
  return t;
}

// one merge: private items at distinct times
void BM_MergeTraces(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const TimedTrace a = alternating("a", n, 0.25);
  const TimedTrace b = alternating("b", n, 0.75);
  for (auto _ : state) benchmark::DoNotOptimize(merge_traces(a, b, {"s"}));
}
BENCHMARK(BM_MergeTraces)->Arg(4)->Arg(16)->Arg(64)->Arg(256);

// 2^n merges: each pair of private items shares a timestamp
void BM_MergeTiedTimes(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const TimedTrace a = alternating("a", n, 0.5);
  const TimedTrace b = alternating("b", n, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(merge_traces(a, b, {"s"}));
}
BENCHMARK(BM_MergeTiedTimes)->DenseRange(2, 10, 4);

void BM_RunAircraft(benchmark::State& state) {
  const Process p = parse(read_file(kCorpus / "aircraft.shcsp"));
  RunConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_max = 100.0;
  std::uint64_t k = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run(p, {}, derive_seed(7, k++), cfg));
}
BENCHMARK(BM_RunAircraft)->Unit(benchmark::kMicrosecond);

void BM_EstimatePChoice(benchmark::State& state) {
  const Process p = parse(read_file(kCorpus / "pchoice.shcsp"));
  const ProbBound b{parse_formula("at(x = 1, now)"), CmpOp::Ge, parse_rational("0.2")};
  EstimateOptions o;
  o.runs = 1000;
  o.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(estimate_prob(b, p, {}, o));
}
BENCHMARK(BM_EstimatePChoice)->Unit(benchmark::kMillisecond);

void BM_CertifyContracting(benchmark::State& state) {
  const CertificateRequest req =
      certificate_request_from_json(json::parse(read_file(kCorpus / "contracting.json")), kCorpus);
  for (auto _ : state) benchmark::DoNotOptimize(check_sde_rule(req));
}
BENCHMARK(BM_CertifyContracting)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
