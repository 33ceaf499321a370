// shcsp: parse, simulate, estimate and certify SHCSP programs.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "shcsp/assertion.hpp"
#include "shcsp/cert.hpp"
#include "shcsp/exec.hpp"
#include "shcsp/io.hpp"
#include "shcsp/parser.hpp"
#include "shcsp/printer.hpp"
#include "shcsp/rng.hpp"
#include "shcsp/validate.hpp"

namespace fs = std::filesystem;
using namespace shcsp;

namespace {

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kError = 2;
constexpr int kUndecided = 3;

struct Options {
  std::string program;
  std::string init;
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  double dt = 1e-3;
  double tmax = 10.0;
  std::string formula;
  std::string request;
  std::string out;
  double confidence = 0.01;
  std::string repeat = "fixed:1";
  unsigned threads = 1;
  bool csv = false;
  bool json = false;
  std::string f;
};

// Thrown for bad input files or flags; reported as exit 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t effective_seed(const Options& o) {
  if (const char* env = std::getenv("SHCSP_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used, 0);
      if (env[used] != '\0') throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw UsageError(std::string("SHCSP_SEED is not an unsigned integer: ") + env);
    }
  }
  return o.seed;
}

RepeatPolicy parse_repeat(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError("--repeat expects fixed:N or geom:Q, got " + text);
  const std::string kind = text.substr(0, colon);
  const std::string arg = text.substr(colon + 1);
  try {
    if (kind == "fixed") {
      std::size_t used = 0;
      const unsigned long n = std::stoul(arg, &used);
      if (used != arg.size()) throw std::invalid_argument(arg);
      return RepeatPolicy::fixed(static_cast<unsigned>(n));
    }
    if (kind == "geom") {
      std::size_t used = 0;
      const double q = std::stod(arg, &used);
      if (used != arg.size() || !(q >= 0.0 && q < 1.0)) throw std::invalid_argument(arg);
      return RepeatPolicy::geometric(q);
    }
  } catch (const std::exception&) {
    throw UsageError("bad --repeat value " + text);
  }
  throw UsageError("--repeat expects fixed:N or geom:Q, got " + text);
}

Valuation parse_init(const std::string& text) {
  Valuation out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--init expects k=v pairs, got " + item);
    try {
      out[item.substr(0, eq)] = to_double(rational_from_json(json(item.substr(eq + 1))));
    } catch (const std::exception&) {
      throw UsageError("bad value in --init: " + item);
    }
  }
  return out;
}

RunConfig run_config(const Options& o) {
  RunConfig cfg;
  cfg.dt = o.dt;
  cfg.t_max = o.tmax;
  cfg.repeat = parse_repeat(o.repeat);
  try {
    cfg.check();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

std::string load(const std::string& path) {
  try {
    return read_file(path);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

// Parses and validates; prints diagnostics and returns nullopt on failure.
std::optional<Process> load_program(const std::string& path, int& status) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    std::cerr << "shcsp: " << e.what() << '\n';
    status = kError;
    return std::nullopt;
  }
  Process p;
  try {
    p = parse(text);
  } catch (const ParseError& e) {
    std::cerr << path << ':' << e.line() << ':' << e.column() << ": error: " << e.what() << '\n';
    status = kFail;
    return std::nullopt;
  }
  const auto diags = validate(p);
  for (const auto& d : diags) std::cerr << path << ":1:1: " << d.severity << ": " << d.message << '\n';
  if (!diags.empty()) {
    status = kFail;
    return std::nullopt;
  }
  status = kOk;
  return p;
}

int cmd_parse(const Options& o) {
  int status = kOk;
  auto p = load_program(o.program, status);
  if (!p) return status;
  std::cout << pretty(*p);
  return kOk;
}

std::string run_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "run_%05zu", i);
  return buf;
}

int cmd_simulate(const Options& o) {
  int status = kOk;
  auto p = load_program(o.program, status);
  if (!p) return status == kFail ? kError : status;
  const RunConfig cfg = run_config(o);
  const Valuation init = parse_init(o.init);
  const std::uint64_t seed = effective_seed(o);
  if (o.out.empty()) throw UsageError("simulate needs --out DIR");
  const fs::path dir(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create " + dir.string() + ": " + ec.message());

  struct Entry {
    std::uint64_t seed = 0;
    std::string exit;
    std::string error;
  };
  std::vector<Entry> entries(o.runs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < o.runs; i = next++) {
      Entry& e = entries[i];
      e.seed = derive_seed(seed, i);
      try {
        RunRecord rec = run(*p, init, e.seed, cfg);
        e.exit = std::string(exit_name(rec.exit));
        write_file_atomic(dir / (run_name(i) + ".json"), to_json(rec).dump(2) + "\n");
        if (o.csv) {
          std::ostringstream csv;
          rec.flow.write_csv(csv);
          write_file_atomic(dir / (run_name(i) + ".csv"), csv.str());
        }
      } catch (const std::exception& ex) {
        e.error = ex.what();
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(o.threads, static_cast<unsigned>(o.runs)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  json records = json::array();
  std::size_t failures = 0;
  for (std::size_t i = 0; i < o.runs; ++i) {
    const Entry& e = entries[i];
    json r{{"index", i}, {"seed", e.seed}};
    if (e.error.empty()) {
      r["file"] = run_name(i) + ".json";
      r["exit"] = e.exit;
      if (o.csv) r["csv"] = run_name(i) + ".csv";
      if (e.exit == exit_name(ExitKind::StepLimit)) ++failures;
    } else {
      r["error"] = e.error;
      ++failures;
      std::cerr << "shcsp: run " << i << " failed: " << e.error << '\n';
    }
    records.push_back(std::move(r));
  }
  json index{{"program", o.program},
             {"master_seed", seed},
             {"runs", o.runs},
             {"dt", cfg.dt},
             {"tmax", cfg.t_max},
             {"failures", failures},
             {"records", records}};
  write_file_atomic(dir / "index.json", index.dump(2) + "\n");
  std::cout << o.runs - failures << "/" << o.runs << " runs written to " << dir.string() << '\n';
  return failures == 0 ? kOk : kFail;
}

int verdict_code(Verdict v) {
  switch (v) {
    case Verdict::Holds: return kOk;
    case Verdict::Fails: return kFail;
    case Verdict::Inconclusive: return kUndecided;
  }
  return kError;
}

int cmd_estimate(const Options& o) {
  int status = kOk;
  auto p = load_program(o.program, status);
  if (!p) return kError;
  if (o.formula.empty()) throw UsageError("estimate needs --formula FILE");
  const std::string text = load(o.formula);
  std::optional<ProbFormula> parsed;
  try {
    parsed = parse_prob_formula(text);
  } catch (const ParseError& e) {
    std::cerr << o.formula << ':' << e.line() << ':' << e.column() << ": error: " << e.what() << '\n';
    return kError;
  }
  const ProbFormula& f = *parsed;
  EstimateOptions opts;
  opts.runs = o.runs;
  opts.delta = o.confidence;
  opts.seed = effective_seed(o);
  opts.threads = o.threads;
  opts.run = run_config(o);
  if (!(opts.delta > 0.0 && opts.delta < 1.0)) throw UsageError("--confidence must lie in (0, 1)");
  const Valuation init = parse_init(o.init);

  const ProbReport rep = check_prob_formula(f, *p, init, opts);
  const auto bounds = atoms(f);
  json atoms_json = json::array();
  for (std::size_t i = 0; i < bounds.size(); ++i) atoms_json.push_back(to_json(bounds[i], rep.atoms[i]));
  json out{{"formula", to_string(f)},
           {"verdict", verdict_name(rep.verdict)},
           {"runs", opts.runs},
           {"seed", opts.seed},
           {"delta", opts.delta},
           {"atoms", atoms_json}};
  if (!o.out.empty()) {
    std::error_code ec;
    fs::create_directories(o.out, ec);
    if (ec) throw UsageError("cannot create " + o.out + ": " + ec.message());
    write_file_atomic(fs::path(o.out) / "estimate.json", out.dump(2) + "\n");
  }
  if (o.json) {
    std::cout << out.dump(2) << '\n';
  } else {
    for (std::size_t i = 0; i < bounds.size(); ++i) {
      const Estimate& e = rep.atoms[i];
      std::cout << to_string(bounds[i]) << "\n  phat = " << format_double(e.phat) << " over " << e.n << " runs ("
                << e.failed << " failed), interval [" << format_double(e.lo) << ", " << format_double(e.hi)
                << "]: " << verdict_name(e.verdict) << '\n';
    }
    std::cout << "verdict: " << verdict_name(rep.verdict) << '\n';
  }
  return verdict_code(rep.verdict);
}

int cmd_certify(const Options& o) {
  if (o.request.empty()) throw UsageError("certify needs --request FILE");
  const std::string text = load(o.request);
  CertificateRequest req;
  try {
    const fs::path base = fs::path(o.request).parent_path();
    req = certificate_request_from_json(json::parse(text), base);
  } catch (const ParseError& e) {
    std::cerr << o.request << ": program or expression error at " << e.line() << ':' << e.column() << ": "
              << e.what() << '\n';
    return kError;
  } catch (const std::exception& e) {
    std::cerr << o.request << ": malformed request: " << e.what() << '\n';
    return kError;
  }
  if (o.threads > 1) req.threads = o.threads;
  const CertificateResult res = check_sde_rule(req);
  const std::string rep = report(req, res);
  if (!o.out.empty()) {
    std::error_code ec;
    fs::create_directories(o.out, ec);
    if (ec) throw UsageError("cannot create " + o.out + ": " + ec.message());
    write_file_atomic(fs::path(o.out) / "certificate.json", to_json(res).dump(2) + "\n");
    write_file_atomic(fs::path(o.out) / "report.txt", rep);
  }
  if (o.json) {
    std::cout << to_json(res).dump(2) << '\n';
  } else {
    std::cout << rep;
  }
  switch (res.verdict) {
    case CertificateResult::Verdict::Certified: return kOk;
    case CertificateResult::Verdict::Rejected: return kFail;
    case CertificateResult::Verdict::Unsupported: return kUndecided;
  }
  return kError;
}

int cmd_lie(const Options& o) {
  const std::string text = load(o.program);
  SdeBlock block;
  Expr f;
  try {
    block = first_sde_block(parse(text));
    f = parse_expr(o.f, text);
  } catch (const ParseError& e) {
    std::cerr << "error at " << e.line() << ':' << e.column() << ": " << e.what() << '\n';
    return kError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "shcsp: " << e.what() << '\n';
    return kError;
  }
  try {
    std::cout << to_string(lie_derivative(f, block)) << '\n';
  } catch (const NonDifferentiable& e) {
    std::cerr << "shcsp: " << e.what() << '\n';
    return kUndecided;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic Hybrid CSP: parse, simulate, estimate and certify"};
  app.require_subcommand(1);
  Options o;

  auto add_run_flags = [&o](CLI::App* c) {
    c->add_option("--init", o.init, "Initial valuation k=v,...");
    c->add_option("--runs", o.runs, "Number of runs")->check(CLI::PositiveNumber);
    c->add_option("--seed", o.seed, "Master seed (SHCSP_SEED overrides)");
    c->add_option("--dt", o.dt, "SDE step");
    c->add_option("--tmax", o.tmax, "Time horizon");
    c->add_option("--repeat", o.repeat, "Repetition policy fixed:N or geom:Q");
    c->add_option("--threads", o.threads, "Worker threads");
  };

  auto* parse_cmd = app.add_subcommand("parse", "Check a program and echo its pretty-printed form");
  parse_cmd->add_option("--program,program", o.program, "Program file")->required();

  auto* sim = app.add_subcommand("simulate", "Write sampled run records");
  sim->add_option("--program,program", o.program, "Program file")->required();
  add_run_flags(sim);
  sim->add_option("--out", o.out, "Output directory")->required();
  sim->add_flag("--csv", o.csv, "Also write each flow as CSV");

  auto* est = app.add_subcommand("estimate", "Monte Carlo check of a probability formula");
  est->add_option("--program,program", o.program, "Program file")->required();
  est->add_option("--formula", o.formula, "Formula file")->required();
  add_run_flags(est);
  est->add_option("--confidence", o.confidence, "Error probability delta of the interval");
  est->add_option("--out", o.out, "Directory for estimate.json");
  est->add_flag("--json", o.json, "Print JSON instead of text");
  o.runs = 1;

  auto* cert = app.add_subcommand("certify", "Check the supermartingale rule for a request");
  cert->add_option("--request,request", o.request, "Request JSON file")->required();
  cert->add_option("--out", o.out, "Directory for certificate.json and report.txt");
  cert->add_option("--threads", o.threads, "Worker threads for grid checks");
  cert->add_flag("--json", o.json, "Print JSON instead of the report");

  auto* lie = app.add_subcommand("lie", "Print the simplified Lie derivative of f along the first SDE block");
  lie->add_option("--program,program", o.program, "Program file")->required();
  lie->add_option("--f", o.f, "Expression")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }
  if (est->parsed() && est->count("--runs") == 0) o.runs = 1000;

  try {
    if (parse_cmd->parsed()) return cmd_parse(o);
    if (sim->parsed()) return cmd_simulate(o);
    if (est->parsed()) return cmd_estimate(o);
    if (cert->parsed()) return cmd_certify(o);
    if (lie->parsed()) return cmd_lie(o);
  } catch (const UsageError& e) {
    std::cerr << "shcsp: " << e.what() << '\n';
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "shcsp: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
