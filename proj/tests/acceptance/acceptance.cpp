// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "shcsp/assertion.hpp"
#include "shcsp/cert.hpp"
#include "shcsp/eval.hpp"
#include "shcsp/exec.hpp"
#include "shcsp/io.hpp"
#include "shcsp/parser.hpp"
#include "shcsp/printer.hpp"
#include "shcsp/rng.hpp"
#include "shcsp/trace.hpp"

namespace fs = std::filesystem;
using namespace shcsp;

namespace {

const fs::path kCorpus = SHCSP_CORPUS_DIR;
const std::string kCli = SHCSP_CLI_PATH;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2fs", secs);
  std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << " (" << buf << "): " << o.detail
            << std::endl;
}

std::string fmt(double v, int digits = 6) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

Process corpus_program(const std::string& name) { return parse(read_file(kCorpus / name)); }

// 1: Doob bound for the aircraft with v = 1, lambda = 1, p = 0.1
Outcome aircraft_bound() {
  const Process prog = corpus_program("aircraft.shcsp");
  const double p = 0.1;
  EstimateOptions opts;
  opts.runs = 10000;
  opts.delta = 0.01;
  opts.seed = 20240601;
  opts.run.dt = 1e-3;
  opts.run.t_max = 100.0;
  const ProbBound bound{parse_formula("not during(abs(y) < 1, [0, now])"), CmpOp::Le, parse_rational("0.1")};
  const auto t0 = std::chrono::steady_clock::now();
  const Estimate e = estimate_prob(bound, prog, {}, opts);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double limit = p + std::sqrt(std::log(200.0) / (2.0 * 1e4));
  const bool ok = e.phat <= limit && secs < 60.0 && e.n + e.failed == opts.runs;
  return {ok, "phat = " + fmt(e.phat) + " <= " + fmt(limit) + " over n = " + std::to_string(e.n) + " (" +
                  std::to_string(e.failed) + " failed), " + fmt(secs, 3) + " s < 60 s"};
}

// 2: p = 0.0002 is admissible exactly when |y0| <= lambda/5000
Outcome aircraft_certificate() {
  const std::string text = read_file(kCorpus / "aircraft.shcsp");
  const SdeBlock block = first_sde_block(parse(text));
  auto request = [&](const Rational& lam, const Rational& y0) {
    CertificateRequest r;
    r.block = block;
    r.f = parse_expr("abs(y)", text);
    r.lam = lam;
    r.p = parse_rational("0.0002");
    r.init = {{"x", 0}, {"y", y0}};
    r.box = {{"x", {0.0, 5.0}}, {"y", {-2.0, 2.0}}};
    r.grid = 41;
    return check_sde_rule(r);
  };
  std::vector<std::string> problems;
  auto admitted = [&](const Rational& lam, const Rational& y0) {
    const auto res = request(lam, y0);
    const bool ok = res.verdict != CertificateResult::Verdict::Rejected;
    if (!ok) problems.push_back("lambda=" + rational_literal(lam) + " y0=" + rational_literal(y0) + " rejected");
    return res;
  };
  auto rejected_initial = [&](const Rational& lam, const Rational& y0) {
    const auto res = request(lam, y0);
    if (res.verdict != CertificateResult::Verdict::Rejected || res.rejected_premise != "initial") {
      problems.push_back("lambda=" + rational_literal(lam) + " y0=" + rational_literal(y0) +
                         " not rejected by the initial premise");
    }
  };
  const Rational one(1);
  const auto at_edge = admitted(one, Rational(1, 5000));
  admitted(one, Rational(-1, 5000));
  admitted(one, Rational(1, 10000));
  admitted(Rational(2), Rational(2, 5000));
  rejected_initial(one, Rational(1, 4000));
  rejected_initial(one, Rational(-1, 4000));
  rejected_initial(one, Rational(5001, 25000000));  // just above 1/5000
  rejected_initial(Rational(2), Rational(1, 2000));
  const bool partial = at_edge.verdict == CertificateResult::Verdict::Unsupported && at_edge.partial_evidence;
  if (!partial) problems.push_back("|y| at the edge should give partial evidence (not C2)");
  if (!at_edge.implied_exact || *at_edge.implied_exact != Rational(1, 5000)) {
    problems.push_back("implied bound at the edge is not exactly 1/5000");
  }
  if (!problems.empty()) return {false, problems.front()};
  return {true,
          "all premises hold for |y0| <= lambda/5000 (verdict partial evidence since |y| is not C2); "
          "|y0| = lambda/4000 and 1/5000 + 1e-8 rejected at premise 'initial'"};
}

// 3: Brownian motion statistics
Outcome brownian() {
  const Process prog = corpus_program("brownian.shcsp");
  RunConfig cfg;
  cfg.dt = 1.0 / 128.0;
  cfg.t_max = 1.0;
  const std::size_t n = 10000;
  const std::vector<double> marks{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<std::vector<double>> inc(marks.size() - 1, std::vector<double>(n));
  std::vector<double> s1(n);
  for (std::size_t i = 0; i < n; ++i) {
    const RunRecord rec = run(prog, {}, derive_seed(314159, i), cfg);
    if (rec.exit != ExitKind::Timeout || rec.final.now != 1.0) throw std::runtime_error("run did not reach t = 1");
    const std::size_t col = static_cast<std::size_t>(
        std::find(rec.flow.vars().begin(), rec.flow.vars().end(), "s") - rec.flow.vars().begin());
    std::vector<double> at;
    for (double t : marks) at.push_back(rec.flow.values(rec.flow.index_at(t))[col]);
    for (std::size_t k = 0; k + 1 < marks.size(); ++k) inc[k][i] = at[k + 1] - at[k];
    s1[i] = rec.final.vals.at("s");
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto cov = [&](const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = mean(a), mb = mean(b);
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
    return s / static_cast<double>(a.size() - 1);
  };
  const double var = cov(s1, s1);
  double worst = 0;
  for (std::size_t a = 0; a < inc.size(); ++a) {
    for (std::size_t b = a + 1; b < inc.size(); ++b) worst = std::max(worst, std::abs(cov(inc[a], inc[b])));
  }
  const bool ok = std::abs(var - 1.0) <= 0.05 && worst <= 0.01;
  return {ok, "var s(1) = " + fmt(var) + " (1 +- 0.05); max |cov| over disjoint quarter increments = " + fmt(worst) +
                  " (<= 0.01)"};
}

// 4: zero-noise unit drift exits s < 1 at t = 1
Outcome degenerate() {
  const Process prog = corpus_program("degenerate.shcsp");
  RunConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_max = 10.0;
  const RunRecord rec = run(prog, {}, 7, cfg);
  const double exit_err = std::abs(rec.final.now - 1.0);
  const std::size_t col = static_cast<std::size_t>(
      std::find(rec.flow.vars().begin(), rec.flow.vars().end(), "s") - rec.flow.vars().begin());
  double worst = 0;
  for (std::size_t r = 0; r < rec.flow.size(); ++r) {
    const double s = rec.flow.values(r)[col];
    if (std::isnan(s)) continue;
    worst = std::max(worst, std::abs(s - rec.flow.time(r)));
  }
  const bool ok = rec.exit == ExitKind::Terminated && exit_err <= 1e-6 && worst <= 10 * cfg.dt;
  return {ok, "exit time error = " + fmt(exit_err) + " (<= 1e-6); max |s(t) - t| = " + fmt(worst) + " (<= 10 dt)"};
}

std::size_t count_runs(const Process& prog, std::size_t n, std::uint64_t seed,
                       const std::function<bool(const RunRecord&)>& pred) {
  RunConfig cfg;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (pred(run(prog, {}, derive_seed(seed, i), cfg))) ++hits;
  }
  return hits;
}

// 5: probabilistic choice frequency
Outcome pchoice_law() {
  const std::size_t n = 10000;
  const std::size_t left =
      count_runs(corpus_program("pchoice.shcsp"), n, 5, [](const RunRecord& r) { return r.final.vals.at("x") == 1.0; });
  const double freq = static_cast<double>(left) / n;
  return {std::abs(freq - 0.25) <= 0.011, "left-branch frequency = " + fmt(freq) + " (0.25 +- 0.011)"};
}

// 6: weighted interrupt frequencies
Outcome interrupt_law() {
  const std::size_t n = 10000;
  std::size_t first = 0, second = 0;
  const Process prog = corpus_program("interrupt_weighted.shcsp");
  RunConfig cfg;
  for (std::size_t i = 0; i < n; ++i) {
    const RunRecord r = run(prog, {}, derive_seed(6, i), cfg);
    const double sel = r.final.vals.at("sel");
    first += sel == 1.0;
    second += sel == 2.0;
  }
  const double f1 = static_cast<double>(first) / n, f2 = static_cast<double>(second) / n;
  const bool ok = std::abs(f1 - 0.25) <= 0.011 && std::abs(f2 - 0.75) <= 0.011 && first + second == n;
  return {ok, "frequencies = (" + fmt(f1) + ", " + fmt(f2) + ") vs (0.25, 0.75) +- 0.011"};
}

// Traces over a small alphabet, coded as item indices and packed three bits
// per item with the length on top.
using Word = std::vector<std::uint8_t>;

std::uint32_t pack(const Word& w) {
  std::uint32_t key = static_cast<std::uint32_t>(w.size()) << 24;
  for (std::size_t k = 0; k < w.size(); ++k) key |= static_cast<std::uint32_t>(w[k]) << (3 * k);
  return key;
}

// Every way of interleaving a and b, pairing the k-th sync item of a with the
// k-th sync item of b when they are equal and adjacent.
class BruteMerge {
 public:
  BruteMerge(const Word& a, const Word& b, const std::vector<char>& sync) : a_(a), b_(b), sync_(sync) {}

  std::vector<std::uint32_t> run() {
    shuffle(0, 0);
    std::sort(out_.begin(), out_.end());
    out_.erase(std::unique(out_.begin(), out_.end()), out_.end());
    return std::move(out_);
  }

 private:
  // side 0 takes the next item of a, side 1 the next item of b; a prefix is
  // dropped as soon as a sync item is not directly followed by its partner
  void shuffle(std::size_t i, std::size_t j) {
    if (i == a_.size() && j == b_.size()) {
      accept();
      return;
    }
    if (i < a_.size() && !awaiting_partner()) {
      word_.push_back({0, a_[i]});
      shuffle(i + 1, j);
      word_.pop_back();
    }
    if (j < b_.size() && (awaiting_partner() ? word_.back().second == b_[j] : !sync_[b_[j]])) {
      word_.push_back({1, b_[j]});
      shuffle(i, j + 1);
      word_.pop_back();
    }
  }

  bool awaiting_partner() const {
    if (word_.empty() || word_.back().first != 0 || !sync_[word_.back().second]) return false;
    return true;
  }

  void accept() {
    Word& merged = merged_;
    merged.clear();
    for (std::size_t k = 0; k < word_.size(); ++k) {
      const auto [side, item] = word_[k];
      if (!sync_[item]) {
        merged.push_back(item);
        continue;
      }
      // a sync item from a must be followed by its equal partner from b
      if (side == 1 || k + 1 >= word_.size() || word_[k + 1].first != 1 || word_[k + 1].second != item) return;
      merged.push_back(item);
      ++k;
    }
    out_.push_back(pack(merged));
  }

  const Word& a_;
  const Word& b_;
  const std::vector<char>& sync_;
  std::vector<std::pair<int, std::uint8_t>> word_;
  Word merged_;
  std::vector<std::uint32_t> out_;
};

// 7: merge_traces against the brute-force oracle
Outcome merge_oracle() {
  std::vector<TimedItem> alphabet;
  for (const char* ch : {"a", "b", "c"}) {
    for (double v : {0.0, 1.0}) alphabet.push_back(TimedItem::comm(ch, v, 0.0));
  }
  std::vector<Word> words{{}};
  for (std::size_t len = 1, from = 0; len <= 4; ++len) {
    const std::size_t to = words.size();
    for (std::size_t k = from; k < to; ++k) {
      for (std::uint8_t c = 0; c < alphabet.size(); ++c) {
        Word w = words[k];
        w.push_back(c);
        words.push_back(std::move(w));
      }
    }
    from = to;
  }
  std::vector<TimedTrace> traces;
  for (const auto& w : words) {
    TimedTrace t;
    for (auto c : w) t.push_back(alphabet[c]);
    traces.push_back(std::move(t));
  }
  auto code_of = [&](const TimedItem& item) {
    return static_cast<std::uint8_t>(std::find(alphabet.begin(), alphabet.end(), item) - alphabet.begin());
  };

  const auto t0 = std::chrono::steady_clock::now();
  std::size_t pairs = 0, nonempty = 0;
  // channel masks, and the sync set and item flags for each mask
  const std::vector<std::string> chans{"a", "b", "c"};
  std::vector<unsigned> masks;
  for (const auto& w : words) {
    unsigned m = 0;
    for (auto c : w) m |= 1u << (c / 2);
    masks.push_back(m);
  }
  std::vector<std::set<std::string>> sync_sets(8);
  std::vector<std::vector<char>> sync_codes(8, std::vector<char>(alphabet.size()));
  for (unsigned m = 0; m < 8; ++m) {
    for (unsigned k = 0; k < 3; ++k) {
      if (m >> k & 1u) sync_sets[m].insert(chans[k]);
    }
    for (std::size_t c = 0; c < alphabet.size(); ++c) sync_codes[m][c] = sync_sets[m].count(alphabet[c].chan) > 0;
  }

  for (std::size_t ia = 0; ia < traces.size(); ++ia) {
    for (std::size_t ib = 0; ib < traces.size(); ++ib) {
      const unsigned m = masks[ia] & masks[ib];
      const std::set<std::string>& common = sync_sets[m];
      const std::vector<char>& sync_code = sync_codes[m];

      const auto got = merge_traces(traces[ia], traces[ib], common);
      std::vector<std::uint32_t> got_keys;
      for (const auto& t : got) {
        Word w;
        for (const auto& item : t) w.push_back(code_of(item));
        got_keys.push_back(pack(w));
      }
      std::sort(got_keys.begin(), got_keys.end());
      const auto want = BruteMerge(words[ia], words[ib], sync_code).run();
      ++pairs;
      if (!got.empty()) ++nonempty;
      if (got_keys != want) return {false, "mismatch after " + std::to_string(pairs) + " pairs"};
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {secs < 10.0, std::to_string(pairs) + " trace pairs (" + std::to_string(traces.size()) + " traces, " +
                           std::to_string(nonempty) + " mergeable) agree with the interleaving oracle in " +
                           fmt(secs, 3) + " s (< 10 s)"};
}

// Random smooth expressions over x, y, z.
class ExprGen {
 public:
  explicit ExprGen(std::uint64_t seed) : rng_(seed) {}

  Expr make(int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 9);
    switch (pick(rng_)) {
      case 0: return Expr::variable(var());
      case 1: return Expr::constant(Rational(std::uniform_int_distribution<long>(-5, 5)(rng_), 2));
      case 2: return make(depth - 1) + make(depth - 1);
      case 3: return make(depth - 1) - make(depth - 1);
      case 4:
      case 5: return make(depth - 1) * make(depth - 1);
      case 6: {
        Expr d = make(depth - 1);
        return make(depth - 1) / (Expr::constant(1L) + Expr::power(d, 2));
      }
      case 7: return Expr::call(Function::Sin, {make(depth - 1)});
      case 8: return Expr::call(Function::Cos, {make(depth - 1)});
      default: return Expr::power(make(depth - 1), std::uniform_int_distribution<unsigned>(2, 3)(rng_));
    }
  }

  std::string var() { return std::string(1, "xyz"[std::uniform_int_distribution<int>(0, 2)(rng_)]); }
  double point() { return std::uniform_real_distribution<double>(-1.0, 1.0)(rng_); }

 private:
  std::mt19937_64 rng_;
};

// 8: symbolic partials against central differences, and the aircraft generator
Outcome lie_correctness() {
  ExprGen gen(8);
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const Expr e = gen.make(4);
    const std::string v = gen.var();
    const Expr de = diff(e, v);
    for (int trial = 0; trial < 5; ++trial) {
      Valuation env{{"x", gen.point()}, {"y", gen.point()}, {"z", gen.point()}};
      const double sym = evaluate(de, env);
      const double h = 1e-5;
      Valuation up = env, down = env;
      up[v] += h;
      down[v] -= h;
      const double num = (evaluate(e, up) - evaluate(e, down)) / (2 * h);
      const double err = std::abs(sym - num) / std::max(1.0, std::abs(sym));
      worst = std::max(worst, err);
      if (err > 1e-6) {
        return {false, "d/d" + v + " of " + to_string(e) + " is off by " + fmt(err) + " (symbolic " + fmt(sym, 17) +
                           ", numeric " + fmt(num, 17) + ")"};
      }
    }
  }
  const std::string text = read_file(kCorpus / "aircraft.shcsp");
  const std::string lf = to_string(lie_derivative(parse_expr("y^2", text), first_sde_block(parse(text))));
  const bool ok = lf == "2*v*y*sin(theta) + 1";
  return {ok, "100 random expressions x 5 points, worst relative error " + fmt(worst, 3) +
                  "; L(y^2) on the aircraft = " + lf};
}

// 9: parse . pretty is the identity over the corpus
Outcome round_trip() {
  std::size_t files = 0;
  std::vector<std::string> bad;
  for (const auto& entry : fs::directory_iterator(kCorpus)) {
    if (entry.path().extension() != ".shcsp") continue;
    ++files;
    const Process p = parse(read_file(entry.path()));
    try {
      if (!(parse(pretty(p)) == p)) bad.push_back(entry.path().filename().string());
    } catch (const std::exception& e) {
      bad.push_back(entry.path().filename().string() + " (" + e.what() + ")");
    }
  }
  if (files == 0) return {false, "no corpus files found"};
  if (!bad.empty()) return {false, std::to_string(bad.size()) + " failures, first " + bad.front()};
  return {true, std::to_string(files) + " programs, 0 failures"};
}

std::map<std::string, std::string> read_dir(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) out[entry.path().filename().string()] = read_file(entry.path());
  return out;
}

// 10: simulate twice with one seed and compare the files byte for byte
Outcome determinism() {
  const fs::path base = fs::temp_directory_path() / ("shcsp_accept_" + std::to_string(::getpid()));
  fs::remove_all(base);
  std::vector<std::map<std::string, std::string>> outputs;
  for (const char* name : {"one", "two"}) {
    const fs::path out = base / name;
    const std::string cmd = "\"" + kCli + "\" simulate \"" + (kCorpus / "aircraft.shcsp").string() +
                            "\" --runs 10 --seed 42 --out \"" + out.string() + "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "simulate failed: " + cmd};
    outputs.push_back(read_dir(out));
  }
  fs::remove_all(base);
  std::size_t records = 0;
  for (const auto& [name, _] : outputs[0]) records += name.rfind("run_", 0) == 0;
  const bool ok = records == 10 && outputs[0] == outputs[1];
  return {ok, std::to_string(records) + " run records plus index, identical across two invocations: " +
                  (outputs[0] == outputs[1] ? "yes" : "no")};
}

// 11: certified contracting requests against Monte Carlo sup-probabilities
Outcome doob_sweep() {
  const std::string text = "{d[s] = -s dt + 0.5 dW & s > 0.4}";
  const Process prog = parse(text);
  const SdeBlock block = first_sde_block(prog);
  const std::vector<std::pair<std::string, std::string>> cases{
      {"1", "0.5"}, {"0.5", "0.6"}, {"2", "1"}, {"0.3", "0.5"}, {"1.5", "1.2"}};
  const double band = hoeffding_band(10000, 0.01);
  std::ostringstream detail;
  bool ok = true;
  for (const auto& [lam_text, s0_text] : cases) {
    const Rational lam = parse_rational(lam_text), s0 = parse_rational(s0_text);
    const Rational bound = s0 * s0 / lam;
    CertificateRequest req;
    req.block = block;
    req.f = parse_expr("s^2");
    req.lam = lam;
    req.p = bound;
    req.init = {{"s", s0}};
    req.box = {{"s", {0.4, 5.0}}};
    req.grid = 401;
    const auto cert = check_sde_rule(req);
    if (cert.verdict != CertificateResult::Verdict::Certified) {
      return {false, "lambda=" + lam_text + " s0=" + s0_text + " not certified: " + cert.reason};
    }
    EstimateOptions opts;
    opts.runs = 10000;
    opts.seed = 11;
    opts.run.dt = 1e-3;
    opts.run.t_max = 50.0;
    const ProbBound pb{parse_formula("not during(s^2 < " + lam_text + ", [0, now])"), CmpOp::Le, bound};
    const Estimate e = estimate_prob(pb, prog, {{"s", to_double(s0)}}, opts);
    const double limit = to_double(bound) + band;
    ok = ok && e.phat <= limit && e.failed == 0;
    detail << "(" << lam_text << ", " << s0_text << "): " << fmt(e.phat, 4) << " <= " << fmt(limit, 4) << "; ";
  }
  return {ok, detail.str()};
}

}  // namespace

int main() {
  std::cout << "shcsp acceptance suite" << std::endl;
  report(1, "aircraft Monte Carlo sup-probability within the Doob bound", aircraft_bound);
  report(2, "aircraft certificate threshold |y0| <= lambda/5000 at p = 0.0002", aircraft_certificate);
  report(3, "Brownian variance and increment covariance", brownian);
  report(4, "degenerate SDE boundary exit and path", degenerate);
  report(5, "probabilistic choice law at p = 0.25", pchoice_law);
  report(6, "weighted interrupt law (1, 3)", interrupt_law);
  report(7, "trace merge equals interleaving oracle", merge_oracle);
  report(8, "Lie derivative and symbolic partials", lie_correctness);
  report(9, "parser round-trip over the corpus", round_trip);
  report(10, "simulate is byte-for-byte deterministic", determinism);
  report(11, "Doob consistency sweep on contracting drift", doob_sweep);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
