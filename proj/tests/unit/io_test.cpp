#include <gtest/gtest.h>

#include <filesystem>

#include "shcsp/io.hpp"
#include "shcsp/parser.hpp"
#include "shcsp/printer.hpp"

using namespace shcsp;

TEST(Io, RunRecordRoundTrips) {
  const Process p = parse(
      "x := 0; {d[x] = 1 dt + 0.5 dW & x < 100} |> [1: ch?y -> {z := y}] || t := 0; {d[t] = 1 dt + 0 dW & t < 1}; "
      "ch!7");
  RunConfig cfg;
  cfg.dt = 0.01;
  const RunRecord rec = run(p, {}, 3, cfg);
  const json j = to_json(rec);
  const RunRecord back = run_record_from_json(json::parse(j.dump()));
  EXPECT_EQ(back.final, rec.final);
  EXPECT_EQ(back.trace, rec.trace);
  EXPECT_EQ(back.exit, rec.exit);
  EXPECT_EQ(back.seed, rec.seed);
  EXPECT_EQ(back.local_traces, rec.local_traces);
  ASSERT_EQ(back.flow.size(), rec.flow.size());
  for (std::size_t r = 0; r < rec.flow.size(); ++r) {
    EXPECT_EQ(back.flow.time(r), rec.flow.time(r));
    EXPECT_EQ(back.flow.snapshot(r), rec.flow.snapshot(r));
  }
  EXPECT_EQ(to_json(back).dump(), j.dump());
}

TEST(Io, UnboundValuesBecomeNull) {
  const RunRecord rec = run(parse("x := 1; y := 2"), {}, 1, {});
  const json j = to_json(rec);
  EXPECT_TRUE(j["flow"]["values"][0][0].is_null());
  EXPECT_FALSE(to_json(rec, false).contains("flow"));
}

TEST(Io, RationalsFromJson) {
  EXPECT_EQ(rational_from_json(json(0.0002)), Rational(1, 5000));
  EXPECT_EQ(rational_from_json(json("1/4000")), Rational(1, 4000));
  EXPECT_EQ(rational_from_json(json("0.25")), Rational(1, 4));
  EXPECT_EQ(rational_from_json(json(3)), Rational(3));
  EXPECT_THROW(rational_from_json(json("1/0")), std::invalid_argument);
  EXPECT_THROW(rational_from_json(json::array()), std::invalid_argument);
}

TEST(Io, CertificateRequestFromJson) {
  const json j = json::parse(R"({
    "program_text": "def k = 1; {d[s] = -k*s dt + 0.5 dW & s > 0.4}",
    "f": "k*s^2", "lambda": 1, "p": "0.25", "init": {"s": 0.5},
    "box": {"s": [0.4, 5]}, "grid": 101
  })");
  const CertificateRequest r = certificate_request_from_json(j);
  EXPECT_EQ(r.lam, Rational(1));
  EXPECT_EQ(r.p, Rational(1, 4));
  EXPECT_EQ(r.init.at("s"), Rational(1, 2));
  EXPECT_EQ(r.grid, 101u);
  EXPECT_EQ(check_sde_rule(r).verdict, CertificateResult::Verdict::Certified);
  const json bad = json::parse(R"({"f": "s", "lambda": 1, "p": 1, "init": {}, "box": {}})");
  EXPECT_THROW(certificate_request_from_json(bad), std::invalid_argument);
}

TEST(Io, CorpusRequestsResolveRelativePrograms) {
  const std::filesystem::path dir = SHCSP_CORPUS_DIR;
  const CertificateRequest r = certificate_request_from_json(json::parse(read_file(dir / "contracting.json")), dir);
  EXPECT_EQ(r.block.vars, std::vector<std::string>{"s"});
}

TEST(Io, AtomicWriteReplacesFile) {
  const auto path = std::filesystem::temp_directory_path() / "shcsp_io_test.txt";
  write_file_atomic(path, "one");
  write_file_atomic(path, "two");
  EXPECT_EQ(read_file(path), "two");
  EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove(path);
  EXPECT_THROW(read_file(path), std::runtime_error);
}

TEST(Io, CertificateResultJson) {
  CertificateRequest r;
  r.block = first_sde_block(parse("{d[s] = -s dt + 0.5 dW & s > 0.4}"));
  r.f = parse_expr("s^2");
  r.lam = 1;
  r.p = Rational(1, 4);
  r.init = {{"s", Rational(1, 2)}};
  r.box = {{"s", {0.4, 5.0}}};
  const json j = to_json(check_sde_rule(r));
  EXPECT_EQ(j["verdict"], "certified");
  EXPECT_EQ(j["implied_bound_exact"], "0.25");
  EXPECT_EQ(j["premises"].size(), 6u);
}
