#include "shcsp/cert.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include "shcsp/flow.hpp"
#include "shcsp/printer.hpp"

namespace shcsp {

// ---------------------------------------------------------------- sign checks

namespace {

struct Chunk {
  std::size_t first_fail = static_cast<std::size_t>(-1);
  double fail_value = 0.0;
  std::size_t in_domain = 0;
  std::size_t singular = 0;
  double max_abs = 0.0;
  std::string error;
  std::size_t error_at = static_cast<std::size_t>(-1);
};

std::string describe_point(const Valuation& point) {
  std::string out;
  for (const auto& [k, v] : point) out += (out.empty() ? "" : ", ") + k + " = " + format_double(v);
  return out;
}

}  // namespace

SignCheck check_sign(const Expr& e, Sign sign, const BoolExpr& domain, const Box& box, unsigned grid,
                     const Valuation& params, const std::vector<Expr>& singular, unsigned threads) {
  if (grid < 2) throw std::invalid_argument("grid needs at least 2 points per dimension");
  if (box.empty()) throw std::invalid_argument("empty box");
  std::vector<std::string> dims;
  for (const auto& [k, iv] : box) {
    if (!(iv.first <= iv.second)) throw std::invalid_argument("empty interval for " + k);
    dims.push_back(k);
  }
  double total = 1;
  for (std::size_t i = 0; i < dims.size(); ++i) total *= grid;
  if (total > 1e9) throw std::invalid_argument("grid too large");
  const auto n_points = static_cast<std::size_t>(total);

  std::set<std::string> names;
  collect_variables(e, names);
  collect_variables(domain, names);
  for (const auto& s : singular) collect_variables(s, names);
  for (const auto& [k, v] : params) names.insert(k);
  for (const auto& k : dims) names.insert(k);
  const SymbolTable table(std::vector<std::string>(names.begin(), names.end()));
  const CompiledExpr ce = compile(e, table);
  const CompiledBool cd = compile(domain, table);
  std::vector<CompiledExpr> cs;
  for (const auto& s : singular) cs.push_back(compile(s, table));
  std::vector<double> base(table.size(), std::nan(""));
  for (const auto& [k, v] : params) base[table.index(k)] = v;
  std::vector<std::size_t> dim_slot;
  for (const auto& k : dims) dim_slot.push_back(table.index(k));

  auto coordinate = [&](std::size_t d, std::size_t i) {
    const auto& [lo, hi] = box.at(dims[d]);
    if (i == grid - 1) return hi;
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid - 1);
  };
  auto load = [&](std::size_t idx, std::vector<double>& slots) {
    for (std::size_t d = dims.size(); d-- > 0;) {
      slots[dim_slot[d]] = coordinate(d, idx % grid);
      idx /= grid;
    }
  };

  auto scan = [&](std::size_t from, std::size_t to, Chunk& out) {
    std::vector<double> slots = base;
    for (std::size_t idx = from; idx < to; ++idx) {
      load(idx, slots);
      try {
        if (!cd(slots.data())) continue;
        bool on_singular = false;
        for (const auto& s : cs) on_singular = on_singular || s(slots.data()) == 0.0;
        if (on_singular) {
          ++out.singular;
          continue;
        }
        ++out.in_domain;
        const double v = ce(slots.data());
        out.max_abs = std::max(out.max_abs, std::fabs(v));
        const bool bad = sign == Sign::NonNeg ? v < 0.0 : v > 0.0;
        if (bad && idx < out.first_fail) {
          out.first_fail = idx;
          out.fail_value = v;
        }
      } catch (const EvalError& err) {
        if (idx < out.error_at) {
          out.error_at = idx;
          out.error = err.what();
        }
      }
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_points)));
  std::vector<Chunk> chunks(workers);
  if (workers == 1) {
    scan(0, n_points, chunks[0]);
  } else {
    std::vector<std::thread> pool;
    const std::size_t step = (n_points + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t from = std::min(n_points, w * step);
      const std::size_t to = std::min(n_points, from + step);
      pool.emplace_back(scan, from, to, std::ref(chunks[w]));
    }
    for (auto& t : pool) t.join();
  }

  SignCheck out;
  out.points = n_points;
  Chunk merged;
  for (const auto& c : chunks) {
    out.in_domain += c.in_domain;
    out.singular += c.singular;
    out.max_abs = std::max(out.max_abs, c.max_abs);
    if (c.first_fail < merged.first_fail) {
      merged.first_fail = c.first_fail;
      merged.fail_value = c.fail_value;
    }
    if (c.error_at < merged.error_at) {
      merged.error_at = c.error_at;
      merged.error = c.error;
    }
  }
  auto point_of = [&](std::size_t idx) {
    std::vector<double> slots = base;
    load(idx, slots);
    Valuation p;
    for (std::size_t d = 0; d < dims.size(); ++d) p[dims[d]] = slots[dim_slot[d]];
    return p;
  };
  if (merged.error_at != static_cast<std::size_t>(-1) && merged.error_at < merged.first_fail) {
    throw EvalError(merged.error + " at " + describe_point(point_of(merged.error_at)));
  }
  if (merged.first_fail != static_cast<std::size_t>(-1)) {
    out.passes = false;
    out.counterexample = point_of(merged.first_fail);
    out.value = merged.fail_value;
  }
  return out;
}

// ---------------------------------------------------------------- SDE rule

void CertificateRequest::check() const {
  if (lam <= 0) throw std::invalid_argument("lambda must be positive");
  if (p < 0 || p > 1) throw std::invalid_argument("p must lie in [0, 1]");
  if (grid < 2) throw std::invalid_argument("grid needs at least 2 points per dimension");
  if (box.empty()) throw std::invalid_argument("box must not be empty");
  for (const auto& [k, iv] : box) {
    if (!(iv.first <= iv.second)) throw std::invalid_argument("empty box interval for " + k);
  }
  for (const auto& v : block.vars) {
    if (!box.count(v)) throw std::invalid_argument("box does not bound SDE variable " + v);
    if (!init.count(v)) throw std::invalid_argument("no initial value for SDE variable " + v);
  }
}

std::string_view verdict_name(CertificateResult::Verdict v) {
  switch (v) {
    case CertificateResult::Verdict::Certified: return "certified";
    case CertificateResult::Verdict::Rejected: return "rejected";
    case CertificateResult::Verdict::Unsupported: return "unsupported";
  }
  return "?";
}

namespace {

Valuation to_doubles(const std::map<std::string, Rational>& m) {
  Valuation out;
  for (const auto& [k, v] : m) out[k] = to_double(v);
  return out;
}

std::string sign_detail(const SignCheck& c, const std::string& what) {
  std::ostringstream s;
  if (c.passes) {
    s << what << " at all " << c.in_domain << " grid points in the domain";
  } else {
    s << "counterexample " << describe_point(*c.counterexample) << " with value " << format_double(c.value);
  }
  s << " (" << c.points << " points";
  if (c.singular) s << ", " << c.singular << " on the singular set skipped";
  s << ")";
  return s.str();
}

}  // namespace

CertificateResult check_sde_rule(const CertificateRequest& req) {
  req.check();
  CertificateResult res;
  const Valuation init = to_doubles(req.init);
  Valuation params = init;
  for (const auto& [k, iv] : req.box) params.erase(k);

  // smoothness
  Premise smooth{"smoothness", "symbolic differentiation", true, ""};
  try {
    res.lie = lie_derivative(req.f, req.block);
    smooth.detail = "f is C2; Lf = " + to_string(res.lie);
  } catch (const NonDifferentiable& nd) {
    res.smooth = false;
    OffSingular off = lie_derivative_off_singular(req.f, req.block);
    res.lie = off.value;
    res.singular = off.singular;
    smooth.passed = false;
    std::string set;
    for (const auto& s : res.singular) set += (set.empty() ? "" : " or ") + to_string(s) + " = 0";
    smooth.detail = std::string("f is not C2: ") + nd.what() + "; off the singular set {" + set +
                    "} Lf = " + to_string(res.lie);
  }
  res.premises.push_back(smooth);

  // initial point
  Premise in_domain{"initial-domain", "", true, ""};
  if (auto exact = evaluate_exact(req.block.domain, req.init)) {
    in_domain.method = "exact rational arithmetic";
    in_domain.passed = *exact;
  } else {
    in_domain.method = "binary64 evaluation";
    in_domain.passed = evaluate(req.block.domain, init);
  }
  in_domain.detail = "initial state " + std::string(in_domain.passed ? "satisfies " : "violates ") +
                     to_string(req.block.domain);
  res.premises.push_back(in_domain);

  Premise initial{"initial", "", true, ""};
  const Rational bound = req.lam * req.p;
  if (auto fx = evaluate_exact(req.f, req.init)) {
    initial.method = "exact rational arithmetic";
    initial.passed = *fx <= bound;
    res.implied_exact = Rational(*fx / req.lam);
    res.implied_bound = to_double(*res.implied_exact);
    initial.detail = "f(s0) = " + rational_literal(*fx) + (initial.passed ? " <= " : " > ") +
                     "lambda*p = " + rational_literal(bound);
  } else {
    initial.method = "binary64 evaluation";
    const double fd = evaluate(req.f, init);
    const double b = to_double(bound);
    initial.passed = fd <= b;
    res.implied_bound = fd / to_double(req.lam);
    initial.detail = "f(s0) = " + format_double(fd) + (initial.passed ? " <= " : " > ") +
                     "lambda*p = " + format_double(b);
  }
  res.premises.push_back(initial);

  // sign premises on the domain
  Premise nonneg{"nonneg", SignCheck::kMethod, true, ""};
  Premise lie{"lie", SignCheck::kMethod, true, ""};
  Premise bounded{"bounded", SignCheck::kMethod, true, ""};
  try {
    SignCheck c1 = check_sign(req.f, Sign::NonNeg, req.block.domain, req.box, req.grid, params, {}, req.threads);
    nonneg.passed = c1.passes;
    nonneg.detail = sign_detail(c1, "f >= 0");
    bounded.detail = "f bounded by " + format_double(c1.max_abs) +
                     " on the box grid; compact support on the domain is assumed, not checked";
    SignCheck c2 =
        check_sign(res.lie, Sign::NonPos, req.block.domain, req.box, req.grid, params, res.singular, req.threads);
    lie.passed = c2.passes;
    lie.detail = sign_detail(c2, "Lf <= 0");
  } catch (const EvalError& err) {
    res.premises.push_back(nonneg);
    res.verdict = CertificateResult::Verdict::Unsupported;
    res.reason = std::string("evaluation failed on the grid: ") + err.what();
    return res;
  }
  res.premises.push_back(nonneg);
  res.premises.push_back(lie);
  res.premises.push_back(bounded);

  res.conclusion = "P(" + to_string(req.f) + " >= " + rational_literal(req.lam) + ") <= " + rational_literal(req.p) +
                   " throughout [o, o+d]";
  res.postcondition = to_string(closure(req.block.domain));

  for (const auto& pr : res.premises) {
    if (pr.name != "smoothness" && !pr.passed) {
      res.verdict = CertificateResult::Verdict::Rejected;
      res.rejected_premise = pr.name;
      return res;
    }
  }
  if (!res.smooth) {
    res.verdict = CertificateResult::Verdict::Unsupported;
    res.partial_evidence = true;
    res.reason = "f is not C2; the premises hold off the singular set only (partial evidence)";
    return res;
  }
  res.verdict = CertificateResult::Verdict::Certified;
  return res;
}

std::string report(const CertificateRequest& req, const CertificateResult& res) {
  std::ostringstream s;
  s << "block: " << to_string(req.block) << "\n";
  s << "f: " << to_string(req.f) << "\n";
  s << "lambda: " << rational_literal(req.lam) << "  p: " << rational_literal(req.p) << "\n";
  s << "Lf: " << to_string(res.lie) << "\n";
  for (const auto& pr : res.premises) {
    s << "  [" << (pr.passed ? "ok" : (pr.name == "smoothness" ? "!!" : "FAIL")) << "] " << pr.name << " ("
      << pr.method << "): " << pr.detail << "\n";
  }
  s << "implied bound f(s0)/lambda: "
    << (res.implied_exact ? rational_literal(*res.implied_exact) : format_double(res.implied_bound)) << "\n";
  s << "verdict: " << verdict_name(res.verdict);
  if (res.verdict == CertificateResult::Verdict::Rejected) s << " (premise " << res.rejected_premise << ")";
  if (res.partial_evidence) s << " (partial evidence)";
  s << "\n";
  if (!res.reason.empty()) s << "reason: " << res.reason << "\n";
  if (!res.conclusion.empty()) s << "conclusion: " << res.conclusion << ", exit state in " << res.postcondition << "\n";
  return s.str();
}

// ---------------------------------------------------------------- bound propagation

bool entails(const BoolExpr& from, const BoolExpr& goal) {
  const auto have = conjuncts(from);
  for (const auto& g : conjuncts(goal)) {
    if (std::none_of(have.begin(), have.end(), [&](const BoolExpr& h) { return h == g; })) return false;
  }
  return true;
}

HoareBound sde_bound(const CertificateRequest& req, const CertificateResult& res) {
  if (res.verdict != CertificateResult::Verdict::Certified) {
    throw CompositionError("only a certified request yields a bound (verdict: " +
                           std::string(verdict_name(res.verdict)) + ")");
  }
  HoareBound b;
  b.statement = Process::sde(req.block);
  b.pre = BoolExpr::literal(true);
  for (const auto& v : req.block.vars) {
    BoolExpr eq = BoolExpr::compare(Expr::variable(v), CmpOp::Eq, Expr::constant(req.init.at(v)));
    b.pre = conjuncts(b.pre).empty() ? eq : BoolExpr::conjunction(b.pre, eq);
  }
  b.post = closure(req.block.domain);
  b.event = BoolExpr::compare(req.f, CmpOp::Ge, Expr::constant(req.lam));
  b.rel = CmpOp::Le;
  b.bound = to_double(req.p);
  b.provenance.push_back("SDE rule: " + res.conclusion);
  return b;
}

HoareBound skip_bound(const BoolExpr& a) {
  HoareBound b;
  b.statement = Process::skip();
  b.pre = a;
  b.post = a;
  b.provenance.push_back("skip rule");
  return b;
}

HoareBound assign_bound(const std::string& var, const Expr& e, const BoolExpr& post) {
  HoareBound b;
  b.statement = Process::assign(var, e);
  b.pre = substitute(post, var, e);
  b.post = post;
  b.provenance.push_back("assignment rule: " + var + " := " + to_string(e));
  return b;
}

namespace {

void require_same_claim(const HoareBound& a, const HoareBound& b, const char* rule) {
  if (!a.event || !b.event) throw CompositionError(std::string(rule) + ": both branches need a probability claim");
  if (!(*a.event == *b.event) || a.rel != b.rel) {
    throw CompositionError(std::string(rule) + ": branches bound different predicates (" + to_string(*a.event) +
                           " vs " + to_string(*b.event) + ")");
  }
}

BoolExpr join_pre(const BoolExpr& a, const BoolExpr& b) { return a == b ? a : BoolExpr::conjunction(a, b); }
BoolExpr join_post(const BoolExpr& a, const BoolExpr& b) { return a == b ? a : BoolExpr::disjunction(a, b); }

bool upper(CmpOp rel) { return rel == CmpOp::Le || rel == CmpOp::Lt; }

}  // namespace

HoareBound cond_bound(const BoolExpr& guard, const HoareBound& then_branch, const HoareBound& else_skip) {
  require_same_claim(then_branch, else_skip, "conditional rule");
  HoareBound b;
  b.statement = Process::cond(guard, then_branch.statement);
  b.pre = BoolExpr::disjunction(BoolExpr::conjunction(guard, then_branch.pre),
                                BoolExpr::conjunction(BoolExpr::negation(guard), else_skip.pre));
  b.post = join_post(then_branch.post, else_skip.post);
  b.event = then_branch.event;
  b.rel = then_branch.rel;
  b.bound = upper(b.rel) ? std::max(then_branch.bound, else_skip.bound) : std::min(then_branch.bound, else_skip.bound);
  b.provenance = then_branch.provenance;
  b.provenance.insert(b.provenance.end(), else_skip.provenance.begin(), else_skip.provenance.end());
  b.provenance.push_back("conditional rule on " + to_string(guard));
  return b;
}

HoareBound combine_pchoice(const HoareBound& bp, const HoareBound& bq, const Rational& p) {
  if (p < 0 || p > 1) throw CompositionError("choice probability out of range");
  require_same_claim(bp, bq, "probabilistic choice rule");
  HoareBound b;
  b.statement = Process::pchoice(bp.statement, p, bq.statement);
  b.pre = join_pre(bp.pre, bq.pre);
  b.post = join_post(bp.post, bq.post);
  b.event = bp.event;
  b.rel = bp.rel;
  const double pd = to_double(p);
  b.bound = pd * bp.bound + (1.0 - pd) * bq.bound;
  if (p == 1) b.bound = bp.bound;
  if (p == 0) b.bound = bq.bound;
  b.provenance = bp.provenance;
  b.provenance.insert(b.provenance.end(), bq.provenance.begin(), bq.provenance.end());
  b.provenance.push_back("probabilistic choice rule with p = " + rational_literal(p));
  return b;
}

HoareBound chain_seq(const HoareBound& b1, const HoareBound& b2) {
  if (!entails(b1.post, b2.pre)) {
    throw CompositionError("sequential rule: postcondition " + to_string(b1.post) + " does not establish " +
                           to_string(b2.pre));
  }
  HoareBound b;
  b.statement = Process::seq(b1.statement, b2.statement);
  b.pre = b1.pre;
  b.post = b2.post;
  const HoareBound& claim = b2.event ? b2 : b1;
  b.event = claim.event;
  b.rel = claim.rel;
  b.bound = claim.bound;
  b.provenance = b1.provenance;
  b.provenance.insert(b.provenance.end(), b2.provenance.begin(), b2.provenance.end());
  b.provenance.push_back("sequential rule");
  return b;
}

}  // namespace shcsp
