#include "shcsp/assertion.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>

#include "shcsp/eval.hpp"
#include "shcsp/flow.hpp"
#include "shcsp/printer.hpp"
#include "shcsp/rng.hpp"
#include "shcsp/validate.hpp"

namespace shcsp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

template <class Node, class T>
std::shared_ptr<const Node> make(T value) {
  return std::make_shared<const Node>(Node{std::move(value)});
}

}  // namespace

// ---------------------------------------------------------------- constructors

TraceTerm::TraceTerm() : node_(make<TraceNode>(tt::Epsilon{})) {}
TraceTerm TraceTerm::epsilon() { return TraceTerm(); }
TraceTerm TraceTerm::history() { return TraceTerm(make<TraceNode>(tt::History{})); }
TraceTerm TraceTerm::item(std::string chan, std::optional<Expr> value, std::optional<Expr> time) {
  return TraceTerm(make<TraceNode>(tt::Item{std::move(chan), std::move(value), std::move(time)}));
}
TraceTerm TraceTerm::concat(TraceTerm a, TraceTerm b) {
  return TraceTerm(make<TraceNode>(tt::Concat{std::move(a), std::move(b)}));
}
TraceTerm TraceTerm::star(TraceTerm a) { return TraceTerm(make<TraceNode>(tt::Star{std::move(a)})); }

bool TraceTerm::is_pattern() const {
  return std::visit(overloaded{
                        [](const tt::Item& i) { return !i.value || !i.time; },
                        [](const tt::Concat& c) { return c.lhs.is_pattern() || c.rhs.is_pattern(); },
                        [](const tt::Star&) { return true; },
                        [](const auto&) { return false; },
                    },
                    node_->value);
}

StateFormula::StateFormula() : node_(make<StateNode>(sf::Const{false})) {}
StateFormula StateFormula::falsum() { return StateFormula(); }
StateFormula StateFormula::verum() { return StateFormula(make<StateNode>(sf::Const{true})); }
StateFormula StateFormula::relation(Term lhs, CmpOp op, Term rhs) {
  return StateFormula(make<StateNode>(sf::Relation{std::move(lhs), op, std::move(rhs)}));
}
StateFormula StateFormula::ready(TraceTerm h, std::string chan, Direction dir) {
  return StateFormula(make<StateNode>(sf::Ready{std::move(h), std::move(chan), dir}));
}
StateFormula StateFormula::negation(StateFormula s) { return StateFormula(make<StateNode>(sf::Not{std::move(s)})); }
StateFormula StateFormula::disjunction(StateFormula a, StateFormula b) {
  return StateFormula(make<StateNode>(sf::Or{std::move(a), std::move(b)}));
}
StateFormula StateFormula::conjunction(StateFormula a, StateFormula b) {
  return StateFormula(make<StateNode>(sf::And{std::move(a), std::move(b)}));
}

Formula::Formula() : node_(make<FormulaNode>(fm::Const{false})) {}
Formula Formula::falsum() { return Formula(); }
Formula Formula::verum() { return Formula(make<FormulaNode>(fm::Const{true})); }
Formula Formula::holds_at(StateFormula s, Expr time) {
  return Formula(make<FormulaNode>(fm::HoldsAt{std::move(s), std::move(time)}));
}
Formula Formula::holds_during(StateFormula s, Expr t1, Expr t2) {
  return Formula(make<FormulaNode>(fm::HoldsDuring{std::move(s), std::move(t1), std::move(t2)}));
}
Formula Formula::holds_in(StateFormula s, Expr t1, Expr t2) {
  return Formula(make<FormulaNode>(fm::HoldsIn{std::move(s), std::move(t1), std::move(t2)}));
}
Formula Formula::negation(Formula f) { return Formula(make<FormulaNode>(fm::Not{std::move(f)})); }
Formula Formula::disjunction(Formula a, Formula b) {
  return Formula(make<FormulaNode>(fm::Or{std::move(a), std::move(b)}));
}
Formula Formula::conjunction(Formula a, Formula b) {
  return Formula(make<FormulaNode>(fm::And{std::move(a), std::move(b)}));
}
Formula Formula::forall_values(std::string var, std::vector<double> grid, Formula body) {
  return Formula(make<FormulaNode>(fm::ForallValues{std::move(var), std::move(grid), std::move(body)}));
}
Formula Formula::forall_times(std::string var, Expr t1, Expr t2, Formula body) {
  return Formula(make<FormulaNode>(fm::ForallTimes{std::move(var), std::move(t1), std::move(t2), std::move(body)}));
}

ProbFormula ProbFormula::bound(ProbBound b) { return ProbFormula(make<ProbNode>(pf::Bound{std::move(b)})); }
ProbFormula ProbFormula::negation(ProbFormula f) { return ProbFormula(make<ProbNode>(pf::Not{std::move(f)})); }
ProbFormula ProbFormula::disjunction(ProbFormula a, ProbFormula b) {
  return ProbFormula(make<ProbNode>(pf::Or{std::move(a), std::move(b)}));
}
ProbFormula ProbFormula::conjunction(ProbFormula a, ProbFormula b) {
  return ProbFormula(make<ProbNode>(pf::And{std::move(a), std::move(b)}));
}

namespace {

void collect_atoms(const ProbFormula& f, std::vector<ProbBound>& out) {
  std::visit(overloaded{
                 [&](const pf::Bound& b) { out.push_back(b.bound); },
                 [&](const pf::Not& n) { collect_atoms(n.operand, out); },
                 [&](const pf::Or& o) {
                   collect_atoms(o.lhs, out);
                   collect_atoms(o.rhs, out);
                 },
                 [&](const pf::And& a) {
                   collect_atoms(a.lhs, out);
                   collect_atoms(a.rhs, out);
                 },
             },
             f.node().value);
}

}  // namespace

std::vector<ProbBound> atoms(const ProbFormula& f) {
  std::vector<ProbBound> out;
  collect_atoms(f, out);
  return out;
}

// ---------------------------------------------------------------- printing

std::string to_string(const TraceTerm& h) {
  return std::visit(overloaded{
                        [](const tt::Epsilon&) { return std::string("eps"); },
                        [](const tt::History&) { return std::string("tr"); },
                        [](const tt::Item& i) {
                          return "<" + i.chan + "." + (i.value ? to_string(*i.value) : "_") + ", " +
                                 (i.time ? to_string(*i.time) : "_") + ">";
                        },
                        [](const tt::Concat& c) { return "(" + to_string(c.lhs) + " ++ " + to_string(c.rhs) + ")"; },
                        [](const tt::Star& s) { return "(" + to_string(s.body) + ")*"; },
                    },
                    h.node().value);
}

namespace {

std::string term_string(const Term& t) {
  return std::visit([](const auto& x) { return to_string(x); }, t);
}

}  // namespace

std::string to_string(const StateFormula& s) {
  return std::visit(overloaded{
                        [](const sf::Const& c) { return std::string(c.value ? "true" : "false"); },
                        [](const sf::Relation& r) {
                          return term_string(r.lhs) + " " + std::string(cmp_symbol(r.op)) + " " + term_string(r.rhs);
                        },
                        [](const sf::Ready& r) {
                          return to_string(r.prefix) + "." + r.chan + (r.dir == Direction::Input ? "?" : "!");
                        },
                        [](const sf::Not& n) { return "not (" + to_string(n.operand) + ")"; },
                        [](const sf::Or& o) { return "(" + to_string(o.lhs) + " or " + to_string(o.rhs) + ")"; },
                        [](const sf::And& a) { return "(" + to_string(a.lhs) + " and " + to_string(a.rhs) + ")"; },
                    },
                    s.node().value);
}

std::string to_string(const Formula& f) {
  return std::visit(
      overloaded{
          [](const fm::Const& c) { return std::string(c.value ? "true" : "false"); },
          [](const fm::HoldsAt& h) { return "at(" + to_string(h.state) + ", " + to_string(h.time) + ")"; },
          [](const fm::HoldsDuring& h) {
            return "during(" + to_string(h.state) + ", [" + to_string(h.from) + ", " + to_string(h.to) + "])";
          },
          [](const fm::HoldsIn& h) {
            return "in(" + to_string(h.state) + ", [" + to_string(h.from) + ", " + to_string(h.to) + "])";
          },
          [](const fm::Not& n) { return "not (" + to_string(n.operand) + ")"; },
          [](const fm::Or& o) { return "(" + to_string(o.lhs) + " or " + to_string(o.rhs) + ")"; },
          [](const fm::And& a) { return "(" + to_string(a.lhs) + " and " + to_string(a.rhs) + ")"; },
          [](const fm::ForallValues& q) {
            std::string grid;
            for (double v : q.grid) grid += (grid.empty() ? "" : ", ") + format_double(v);
            return "(forall " + q.var + " in {" + grid + "}: " + to_string(q.body) + ")";
          },
          [](const fm::ForallTimes& q) {
            return "(forall " + q.var + " in [" + to_string(q.from) + ", " + to_string(q.to) + "]: " +
                   to_string(q.body) + ")";
          },
      },
      f.node().value);
}

std::string to_string(const ProbBound& b) {
  return "P(" + to_string(b.formula) + ") " + std::string(cmp_symbol(b.op)) + " " + rational_literal(b.p);
}

std::string to_string(const ProbFormula& f) {
  return std::visit(overloaded{
                        [](const pf::Bound& b) { return to_string(b.bound); },
                        [](const pf::Not& n) { return "not (" + to_string(n.operand) + ")"; },
                        [](const pf::Or& o) { return "(" + to_string(o.lhs) + " or " + to_string(o.rhs) + ")"; },
                        [](const pf::And& a) { return "(" + to_string(a.lhs) + " and " + to_string(a.rhs) + ")"; },
                    },
                    f.node().value);
}

// ---------------------------------------------------------------- evaluation core

namespace {

void logical_names(const Formula& f, std::set<std::string>& out) {
  std::visit(overloaded{
                 [&](const fm::Not& n) { logical_names(n.operand, out); },
                 [&](const fm::Or& o) {
                   logical_names(o.lhs, out);
                   logical_names(o.rhs, out);
                 },
                 [&](const fm::And& a) {
                   logical_names(a.lhs, out);
                   logical_names(a.rhs, out);
                 },
                 [&](const fm::ForallValues& q) {
                   out.insert(q.var);
                   logical_names(q.body, out);
                 },
                 [&](const fm::ForallTimes& q) {
                   out.insert(q.var);
                   logical_names(q.body, out);
                 },
                 [](const auto&) {},
             },
             f.node().value);
}

/// Comm items of the first `len` items of `t`.
TimedTrace comm_prefix(const TimedTrace& t, std::size_t len) {
  TimedTrace out;
  for (std::size_t i = 0; i < len && i < t.size(); ++i) {
    if (t[i].is_comm()) out.push_back(t[i]);
  }
  return out;
}

/// Binds value terms to a frame of slots: state variables, `now` and the
/// logical variables. Logical variables shadow state variables.
class Frame {
 public:
  Frame(const std::vector<std::string>& state_vars, const std::set<std::string>& logical) {
    std::vector<std::string> names(state_vars.begin(), state_vars.end());
    names.insert(names.end(), logical.begin(), logical.end());
    names.emplace_back("now");
    table_ = SymbolTable(std::move(names));
    slots_.assign(table_.size(), std::nan(""));
    for (const auto& v : state_vars) {
      column_slot_.push_back(logical.count(v) || v == "now" ? kNone : table_.index(v));
    }
    now_slot_ = table_.index("now");
  }

  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  void load(const double* values, double now) {
    for (std::size_t c = 0; c < column_slot_.size(); ++c) {
      if (column_slot_[c] != kNone) slots_[column_slot_[c]] = values[c];
    }
    slots_[now_slot_] = now;
  }

  void bind(const std::string& name, double value) { slots_[table_.index(name)] = value; }

  double value(const Expr& e) {
    auto it = cache_.find(e.get());
    if (it == cache_.end()) it = cache_.emplace(e.get(), compile(e, table_)).first;
    return it->second(slots_.data());
  }

 private:
  SymbolTable table_;
  std::vector<double> slots_;
  std::vector<std::size_t> column_slot_;
  std::size_t now_slot_ = 0;
  std::unordered_map<const ExprNode*, CompiledExpr> cache_;
};

/// Trace and readiness visible at the point being evaluated.
struct View {
  const TimedTrace* trace;
  std::size_t trace_len;
  const std::vector<ReadyItem>* rdy;
};

TimedTrace eval_trace(const TraceTerm& h, Frame& frame, const View& view) {
  return std::visit(overloaded{
                        [](const tt::Epsilon&) { return TimedTrace{}; },
                        [&](const tt::History&) { return comm_prefix(*view.trace, view.trace_len); },
                        [&](const tt::Item& i) {
                          if (!i.value || !i.time) throw EvalError("wildcard '_' outside a trace pattern");
                          return TimedTrace{TimedItem::comm(i.chan, frame.value(*i.value), frame.value(*i.time))};
                        },
                        [&](const tt::Concat& c) {
                          TimedTrace out = eval_trace(c.lhs, frame, view);
                          TimedTrace rhs = eval_trace(c.rhs, frame, view);
                          out.insert(out.end(), rhs.begin(), rhs.end());
                          return out;
                        },
                        [](const tt::Star&) -> TimedTrace { throw EvalError("star in value position"); },
                    },
                    h.node().value);
}

/// Positions where a match of `h` starting at `from` can end.
std::vector<std::size_t> match_ends(const TraceTerm& h, const TimedTrace& t, std::size_t from, Frame& frame,
                                    const View& view) {
  return std::visit(
      overloaded{
          [&](const tt::Item& i) {
            std::vector<std::size_t> out;
            if (from < t.size() && t[from].chan == i.chan && (!i.value || frame.value(*i.value) == t[from].value) &&
                (!i.time || frame.value(*i.time) == t[from].time)) {
              out.push_back(from + 1);
            }
            return out;
          },
          [&](const tt::Concat& c) {
            std::set<std::size_t> out;
            for (std::size_t mid : match_ends(c.lhs, t, from, frame, view)) {
              for (std::size_t e : match_ends(c.rhs, t, mid, frame, view)) out.insert(e);
            }
            return std::vector<std::size_t>(out.begin(), out.end());
          },
          [&](const tt::Star& s) {
            std::set<std::size_t> seen{from};
            std::vector<std::size_t> frontier{from};
            while (!frontier.empty()) {
              std::size_t p = frontier.back();
              frontier.pop_back();
              for (std::size_t e : match_ends(s.body, t, p, frame, view)) {
                if (seen.insert(e).second) frontier.push_back(e);
              }
            }
            return std::vector<std::size_t>(seen.begin(), seen.end());
          },
          [&](const auto&) {
            // a concrete piece: compare literally
            TimedTrace lit = eval_trace(h, frame, view);
            std::vector<std::size_t> out;
            if (from + lit.size() <= t.size() && std::equal(lit.begin(), lit.end(), t.begin() + from)) {
              out.push_back(from + lit.size());
            }
            return out;
          },
      },
      h.node().value);
}

bool compare(double a, CmpOp op, double b) {
  switch (op) {
    case CmpOp::Lt: return a < b;
    case CmpOp::Le: return a <= b;
    case CmpOp::Eq: return a == b;
    case CmpOp::Ge: return a >= b;
    case CmpOp::Gt: return a > b;
  }
  return false;
}

bool traces_equal(const TraceTerm& a, const TraceTerm& b, Frame& frame, const View& view) {
  const bool pa = a.is_pattern();
  const bool pb = b.is_pattern();
  if (pa && pb) throw EvalError("cannot compare two trace patterns");
  if (!pa && !pb) return eval_trace(a, frame, view) == eval_trace(b, frame, view);
  const TraceTerm& pattern = pa ? a : b;
  const TimedTrace concrete = eval_trace(pa ? b : a, frame, view);
  auto ends = match_ends(pattern, concrete, 0, frame, view);
  return std::find(ends.begin(), ends.end(), concrete.size()) != ends.end();
}

bool eval_state(const StateFormula& s, Frame& frame, const View& view) {
  return std::visit(
      overloaded{
          [](const sf::Const& c) { return c.value; },
          [&](const sf::Relation& r) {
            const Expr* la = std::get_if<Expr>(&r.lhs);
            const Expr* ra = std::get_if<Expr>(&r.rhs);
            if (la && ra) return compare(frame.value(*la), r.op, frame.value(*ra));
            if (la || ra) throw EvalError("cannot compare a value with a trace");
            if (r.op != CmpOp::Eq) throw EvalError("traces can only be compared with '='");
            return traces_equal(std::get<TraceTerm>(r.lhs), std::get<TraceTerm>(r.rhs), frame, view);
          },
          [&](const sf::Ready& r) {
            const TimedTrace h = eval_trace(r.prefix, frame, view);
            const std::size_t k = count_on_channel(h, r.chan);
            return std::any_of(view.rdy->begin(), view.rdy->end(), [&](const ReadyItem& item) {
              return item.chan == r.chan && item.direction == r.dir && count_on_channel(item.prefix, r.chan) == k;
            });
          },
          [&](const sf::Not& n) { return !eval_state(n.operand, frame, view); },
          [&](const sf::Or& o) { return eval_state(o.lhs, frame, view) || eval_state(o.rhs, frame, view); },
          [&](const sf::And& a) { return eval_state(a.lhs, frame, view) && eval_state(a.rhs, frame, view); },
      },
      s.node().value);
}

struct StateFrame {
  std::vector<std::string> names;
  std::vector<double> values;
};

StateFrame split(const ProcState& state) {
  StateFrame out;
  for (const auto& [k, v] : state.vals) {
    out.names.push_back(k);
    out.values.push_back(v);
  }
  return out;
}

std::set<std::string> keys(const Bindings& b) {
  std::set<std::string> out;
  for (const auto& [k, v] : b) out.insert(k);
  return out;
}

}  // namespace

TermValue eval_term(const Term& t, const ProcState& state, const Bindings& logical) {
  StateFrame sfr = split(state);
  Frame frame(sfr.names, keys(logical));
  frame.load(sfr.values.data(), state.now);
  for (const auto& [k, v] : logical) frame.bind(k, v);
  View view{&state.tr, state.tr.size(), &state.rdy};
  if (const auto* e = std::get_if<Expr>(&t)) return frame.value(*e);
  return eval_trace(std::get<TraceTerm>(t), frame, view);
}

bool eval_state_formula(const StateFormula& s, const ProcState& state, const Bindings& logical) {
  StateFrame sfr = split(state);
  Frame frame(sfr.names, keys(logical));
  frame.load(sfr.values.data(), state.now);
  for (const auto& [k, v] : logical) frame.bind(k, v);
  View view{&state.tr, state.tr.size(), &state.rdy};
  return eval_state(s, frame, view);
}

// ---------------------------------------------------------------- formulas over flows

struct FormulaEvaluator::Impl {
  Formula formula;
  std::set<std::string> logical;
  std::vector<std::string> vars;
  std::optional<Frame> frame;
  const RunRecord* rec = nullptr;

  explicit Impl(Formula f) : formula(std::move(f)) { logical_names(formula, logical); }

  void bind_to(const RunRecord& r) {
    rec = &r;
    if (!frame || vars != r.flow.vars()) {
      vars = r.flow.vars();
      frame.emplace(vars, logical);
    }
    if (r.flow.empty()) throw EvalError("run has an empty flow");
  }

  const Flow& flow() const { return rec->flow; }

  View view_at(std::size_t row) const {
    return View{&flow().trace(), flow().trace_length(row), &flow().ready_set(flow().ready_id(row))};
  }

  // time terms are read against the final state
  double time_value(const Expr& e) {
    const std::size_t last = flow().size() - 1;
    frame->load(flow().values(last), flow().time(last));
    return frame->value(e);
  }

  std::size_t row_at(double t) const {
    try {
      return flow().index_at(t);
    } catch (const std::out_of_range&) {
      throw EvalError("time " + format_double(t) + " outside the flow [" + format_double(flow().start_time()) +
                      ", " + format_double(flow().end_time()) + "]");
    }
  }

  bool state_at(const StateFormula& s, std::size_t row) {
    frame->load(flow().values(row), flow().time(row));
    return eval_state(s, *frame, view_at(row));
  }

  /// Rows covering [a, b]: the row in effect at a, the earlier event rows
  /// recorded at a once the variables bound there are initialised, then
  /// every later row up to b.
  std::pair<std::size_t, std::size_t> rows(double a, double b) const {
    const std::size_t anchor = row_at(a);
    std::size_t first = anchor;
    while (first > 0 && flow().time(first - 1) >= a && initialised(first - 1, anchor)) --first;
    const std::size_t last = row_at(b);
    return {first, last};
  }

  bool initialised(std::size_t row, std::size_t anchor) const {
    const double* v = flow().values(row);
    const double* w = flow().values(anchor);
    for (std::size_t c = 0; c < vars.size(); ++c) {
      if (std::isnan(v[c]) && !std::isnan(w[c])) return false;
    }
    return true;
  }

  bool eval(const Formula& f) {
    return std::visit(
        overloaded{
            [](const fm::Const& c) { return c.value; },
            [&](const fm::HoldsAt& h) { return state_at(h.state, row_at(time_value(h.time))); },
            [&](const fm::HoldsDuring& h) {
              const double a = time_value(h.from);
              const double b = time_value(h.to);
              if (a > b) return true;
              auto [first, last] = rows(a, b);
              for (std::size_t r = first; r <= last; ++r) {
                if (!state_at(h.state, r)) return false;
              }
              return true;
            },
            [&](const fm::HoldsIn& h) {
              const double a = time_value(h.from);
              const double b = time_value(h.to);
              if (a > b) return false;
              auto [first, last] = rows(a, b);
              for (std::size_t r = first; r <= last; ++r) {
                if (state_at(h.state, r)) return true;
              }
              return false;
            },
            [&](const fm::Not& n) { return !eval(n.operand); },
            [&](const fm::Or& o) { return eval(o.lhs) || eval(o.rhs); },
            [&](const fm::And& a) { return eval(a.lhs) && eval(a.rhs); },
            [&](const fm::ForallValues& q) {
              for (double v : q.grid) {
                frame->bind(q.var, v);
                if (!eval(q.body)) return false;
              }
              return true;
            },
            [&](const fm::ForallTimes& q) {
              const double a = time_value(q.from);
              const double b = time_value(q.to);
              if (a > b) return true;
              auto [first, last] = rows(a, b);
              std::vector<double> times{a};
              for (std::size_t r = first; r <= last; ++r) {
                const double t = flow().time(r);
                if (t > times.back()) times.push_back(t);
              }
              for (double t : times) {
                frame->bind(q.var, t);
                if (!eval(q.body)) return false;
              }
              return true;
            },
        },
        f.node().value);
  }
};

FormulaEvaluator::FormulaEvaluator(Formula f) : impl_(std::make_unique<Impl>(std::move(f))) {}
FormulaEvaluator::~FormulaEvaluator() = default;
FormulaEvaluator::FormulaEvaluator(FormulaEvaluator&&) noexcept = default;
FormulaEvaluator& FormulaEvaluator::operator=(FormulaEvaluator&&) noexcept = default;

bool FormulaEvaluator::operator()(const RunRecord& rec) {
  impl_->bind_to(rec);
  return impl_->eval(impl_->formula);
}

bool eval_formula(const Formula& f, const RunRecord& rec) { return FormulaEvaluator(f)(rec); }

// ---------------------------------------------------------------- estimation

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

double hoeffding_band(std::size_t n, double delta) {
  if (n == 0) throw std::invalid_argument("Hoeffding band needs at least one run");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("confidence parameter must lie in (0, 1)");
  return std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n)));
}

Estimate make_estimate(std::size_t successes, std::size_t n, std::size_t failed, double delta, CmpOp op,
                       const Rational& p) {
  if (op == CmpOp::Eq) throw std::invalid_argument("probability bounds use one of < <= >= >");
  if (successes > n) throw std::invalid_argument("more successes than runs");
  Estimate e;
  e.n = n;
  e.successes = successes;
  e.failed = failed;
  e.phat = static_cast<double>(successes) / static_cast<double>(n);
  const double band = hoeffding_band(n, delta);
  e.lo = std::max(0.0, e.phat - band);
  e.hi = std::min(1.0, e.phat + band);
  const Rational lo = exact_rational(e.lo);
  const Rational hi = exact_rational(e.hi);
  const bool all = successes == n;
  const bool none = successes == 0;

  Verdict v = Verdict::Inconclusive;
  switch (op) {
    case CmpOp::Ge:
      if (p == 1) {
        v = all ? Verdict::Holds : Verdict::Fails;
      } else if (lo >= p) {
        v = Verdict::Holds;
      } else if (hi < p) {
        v = Verdict::Fails;
      }
      break;
    case CmpOp::Gt:
      if (p == 0 && !none) {
        v = Verdict::Holds;
      } else if (lo > p) {
        v = Verdict::Holds;
      } else if (hi <= p) {
        v = Verdict::Fails;
      }
      break;
    case CmpOp::Le:
      if (p == 0) {
        v = none ? Verdict::Holds : Verdict::Fails;
      } else if (hi <= p) {
        v = Verdict::Holds;
      } else if (lo > p) {
        v = Verdict::Fails;
      }
      break;
    case CmpOp::Lt:
      if (p == 1 && !all) {
        v = Verdict::Holds;
      } else if (hi < p) {
        v = Verdict::Holds;
      } else if (lo >= p) {
        v = Verdict::Fails;
      }
      break;
    case CmpOp::Eq: break;
  }
  e.verdict = v;
  return e;
}

namespace {

Verdict kleene_not(Verdict v) {
  if (v == Verdict::Holds) return Verdict::Fails;
  if (v == Verdict::Fails) return Verdict::Holds;
  return v;
}

Verdict kleene_or(Verdict a, Verdict b) {
  if (a == Verdict::Holds || b == Verdict::Holds) return Verdict::Holds;
  if (a == Verdict::Fails && b == Verdict::Fails) return Verdict::Fails;
  return Verdict::Inconclusive;
}

Verdict combine(const ProbFormula& f, const std::vector<Estimate>& est, std::size_t& next) {
  return std::visit(overloaded{
                        [&](const pf::Bound&) { return est[next++].verdict; },
                        [&](const pf::Not& n) { return kleene_not(combine(n.operand, est, next)); },
                        [&](const pf::Or& o) {
                          Verdict a = combine(o.lhs, est, next);
                          return kleene_or(a, combine(o.rhs, est, next));
                        },
                        [&](const pf::And& a) {
                          Verdict l = combine(a.lhs, est, next);
                          Verdict r = combine(a.rhs, est, next);
                          return kleene_not(kleene_or(kleene_not(l), kleene_not(r)));
                        },
                    },
                    f.node().value);
}

std::vector<Estimate> estimate_atoms(const std::vector<ProbBound>& bounds, const Process& program,
                                     const Valuation& init, const EstimateOptions& opts) {
  if (opts.runs == 0) throw std::invalid_argument("estimation needs at least one run");
  hoeffding_band(1, opts.delta);
  opts.run.check();
  if (auto diags = validate(program); !diags.empty()) {
    throw std::invalid_argument("invalid program: " + diags.front().message);
  }
  if (has_nested_parallel(program)) {
    throw std::invalid_argument("parallel composition below a sequential construct is not executable");
  }

  const std::size_t n = opts.runs;
  const std::size_t k = bounds.size();
  constexpr std::uint8_t kFailed = 2;
  std::vector<std::uint8_t> outcome(n * k, 0);
  std::vector<std::uint8_t> failed(n, 0);
  std::vector<std::string> messages(n);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    std::vector<FormulaEvaluator> evals;
    for (const auto& b : bounds) evals.emplace_back(b.formula);
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        RunRecord rec = run(program, init, derive_seed(opts.seed, i), opts.run);
        if (rec.exit == ExitKind::StepLimit) {
          failed[i] = kFailed;
          messages[i] = "run " + std::to_string(i) + " hit the instantaneous step limit";
          continue;
        }
        for (std::size_t a = 0; a < k; ++a) outcome[i * k + a] = evals[a](rec) ? 1 : 0;
      } catch (const std::exception& err) {
        failed[i] = kFailed;
        messages[i] = "run " + std::to_string(i) + ": " + err.what();
      }
    }
  };
  unsigned threads = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::size_t n_failed = 0;
  std::string first_message;
  for (std::size_t i = 0; i < n; ++i) {
    if (failed[i]) {
      if (n_failed == 0) first_message = messages[i];
      ++n_failed;
    }
  }
  if (n_failed * 100 > n) {
    throw EstimationError(std::to_string(n_failed) + " of " + std::to_string(n) +
                          " runs failed; first failure: " + first_message);
  }
  const std::size_t used = n - n_failed;
  if (used == 0) throw EstimationError("every run failed: " + first_message);
  std::vector<Estimate> out;
  for (std::size_t a = 0; a < k; ++a) {
    std::size_t s = 0;
    for (std::size_t i = 0; i < n; ++i) s += failed[i] ? 0 : outcome[i * k + a];
    out.push_back(make_estimate(s, used, n_failed, opts.delta, bounds[a].op, bounds[a].p));
  }
  return out;
}

}  // namespace

Estimate estimate_prob(const ProbBound& b, const Process& program, const Valuation& init,
                       const EstimateOptions& opts) {
  return estimate_atoms({b}, program, init, opts).front();
}

ProbReport check_prob_formula(const ProbFormula& f, const Process& program, const Valuation& init,
                              const EstimateOptions& opts) {
  ProbReport report;
  report.atoms = estimate_atoms(atoms(f), program, init, opts);
  std::size_t next = 0;
  report.verdict = combine(f, report.atoms, next);
  return report;
}

}  // namespace shcsp
