#include "shcsp/exec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "shcsp/eval.hpp"
#include "shcsp/flow.hpp"
#include "shcsp/rng.hpp"
#include "shcsp/sde.hpp"
#include "shcsp/validate.hpp"

namespace shcsp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Frame {
  enum class Kind { Exec, Loop, LoopExit };
  Kind kind = Kind::Exec;
  Process proc;  // Loop and LoopExit hold the repeated body
  unsigned remaining = 0;
};

enum class Action { Internal, Waiting, Evolving, Done };

// One Euler-Maruyama step drawn ahead of time. When another component's
// event lands inside it, the state is read off the same segment.
struct Segment {
  bool active = false;
  double ta = 0.0;
  double tb = 0.0;
  double texit = kInf;
  double theta_exit = 1.0;
  std::vector<double> sa;
  std::vector<double> sb;
};

struct Leaf {
  std::vector<Frame> stack;
  Rng rng;
  bool registered = false;  // readiness posted, or SDE entered
  bool exit_pending = false;
  std::vector<ReadyItem> ready;
  Segment seg;
  TimedTrace local;
  std::set<std::string> alphabet;
};

struct Offer {
  std::size_t leaf;
  Direction dir;
  std::string chan;
  int branch;  // -1 for a plain input/output
};

}  // namespace

std::string_view exit_name(ExitKind kind) {
  switch (kind) {
    case ExitKind::Terminated: return "terminated";
    case ExitKind::Timeout: return "timeout";
    case ExitKind::Deadlock: return "deadlock";
    case ExitKind::StepLimit: return "step-limit";
  }
  return "?";
}

ExitKind exit_from_name(std::string_view name) {
  for (ExitKind k : {ExitKind::Terminated, ExitKind::Timeout, ExitKind::Deadlock, ExitKind::StepLimit}) {
    if (exit_name(k) == name) return k;
  }
  throw std::invalid_argument("unknown exit kind '" + std::string(name) + "'");
}

std::string StepLabel::text() const {
  switch (kind) {
    case Kind::Tau: return "tau";
    case Kind::Comm: return chan + "." + format_double(value);
    case Kind::Delay: return format_double(value);
  }
  return "?";
}

std::size_t weighted_pick(const std::vector<Rational>& weights, double u) {
  if (weights.empty()) throw std::invalid_argument("weighted_pick: no weights");
  Rational total = 0;
  for (const auto& w : weights) total += w;
  const Rational target = exact_rational(u) * total;
  Rational cumulative = 0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    cumulative += weights[j];
    if (target < cumulative) return j;
  }
  return weights.size() - 1;
}

Side pchoice_branch(const Rational& p, double u) { return exact_rational(u) <= p ? Side::Left : Side::Right; }

struct Machine::Impl {
  Process root;
  RunConfig cfg;
  std::uint64_t seed;
  SymbolTable table;
  std::vector<double> slots;
  std::vector<Leaf> leaves;
  Rng sched;
  double now = 0.0;
  TimedTrace tr;
  Flow flow;
  std::size_t ready_id = 0;
  bool ready_dirty = true;
  std::size_t instant_steps = 0;
  bool done = false;
  ExitKind exit_kind = ExitKind::Terminated;

  std::unordered_map<const ExprNode*, CompiledExpr> expr_cache;
  std::unordered_map<const BoolNode*, CompiledBool> bool_cache;
  std::unordered_map<const SdeBlock*, std::unique_ptr<SdeIntegrator>> integ_cache;

  Impl(const Process& p, const ProcState& init, std::uint64_t seed_, const RunConfig& cfg_)
      : root(p), cfg(cfg_), seed(seed_), sched(stream_seed(seed_, 0)) {
    cfg.check();
    if (has_nested_parallel(p)) {
      throw std::invalid_argument("parallel composition below a sequential construct is not executable");
    }
    std::vector<std::string> names;
    for (const auto& v : variables(p)) names.push_back(v);
    for (const auto& [k, v] : init.vals) names.push_back(k);
    table = SymbolTable(std::move(names));
    slots.assign(table.size(), std::nan(""));
    for (const auto& [k, v] : init.vals) slots[table.index(k)] = v;
    now = init.now;
    tr = init.tr;

    auto components = parallel_components(p);
    for (std::size_t k = 0; k < components.size(); ++k) {
      Leaf leaf;
      leaf.rng = Rng(stream_seed(seed_, k + 1));
      leaf.stack.push_back(Frame{Frame::Kind::Exec, components[k], 0});
      leaf.alphabet = channels(components[k]);
      leaves.push_back(std::move(leaf));
    }
    adopt_readiness(init.rdy);
    flow = Flow(table.names());
    record();
  }

  // readiness already present in the initial state counts as posted
  void adopt_readiness(const std::vector<ReadyItem>& rdy) {
    if (rdy.empty()) return;
    auto posted = [&](const std::string& chan, Direction dir) {
      ReadyItem probe{chan, dir, tr};
      return std::any_of(rdy.begin(), rdy.end(), [&](const ReadyItem& r) { return same_readiness(r, probe); });
    };
    for (auto& leaf : leaves) {
      resolve(leaf);
      if (leaf.stack.empty() || leaf.stack.back().kind != Frame::Kind::Exec) continue;
      const auto& node = leaf.stack.back().proc.node().value;
      if (const auto* in = std::get_if<proc::Input>(&node); in && posted(in->chan, Direction::Input)) {
        leaf.registered = true;
        leaf.ready = {ReadyItem{in->chan, Direction::Input, tr}};
      } else if (const auto* out = std::get_if<proc::Output>(&node); out && posted(out->chan, Direction::Output)) {
        leaf.registered = true;
        leaf.ready = {ReadyItem{out->chan, Direction::Output, tr}};
      } else if (const auto* intr = std::get_if<proc::Interrupt>(&node)) {
        bool all = !intr->branches.empty();
        for (const auto& b : intr->branches) all = all && posted(b.event.chan, b.event.direction);
        if (all) {
          leaf.registered = true;
          for (const auto& b : intr->branches) leaf.ready.push_back(ReadyItem{b.event.chan, b.event.direction, tr});
        }
      }
    }
  }

  // ---- evaluation ----

  double eval(const Expr& e) {
    auto it = expr_cache.find(e.get());
    if (it == expr_cache.end()) it = expr_cache.emplace(e.get(), compile(e, table)).first;
    return it->second(slots.data());
  }

  bool holds(const BoolExpr& b) {
    const BoolNode* key = &b.node();
    auto it = bool_cache.find(key);
    if (it == bool_cache.end()) it = bool_cache.emplace(key, compile(b, table)).first;
    return it->second(slots.data());
  }

  SdeIntegrator& integrator(const SdeBlock& block) {
    auto& slot = integ_cache[&block];
    if (!slot) slot = std::make_unique<SdeIntegrator>(block, table);
    return *slot;
  }

  // ---- bookkeeping ----

  std::vector<ReadyItem> ready_union() const {
    std::vector<ReadyItem> out;
    for (const auto& leaf : leaves) out.insert(out.end(), leaf.ready.begin(), leaf.ready.end());
    return out;
  }

  void record() {
    if (ready_dirty) {
      ready_id = flow.add_ready_set(ready_union());
      ready_dirty = false;
    }
    flow.append(now, slots.data(), tr.size(), ready_id);
  }

  void tau(Leaf& leaf) {
    tr.push_back(TimedItem::internal(now));
    leaf.local.push_back(tr.back());
  }

  void reset(Leaf& leaf) {
    leaf.registered = false;
    leaf.exit_pending = false;
    leaf.seg.active = false;
    if (!leaf.ready.empty()) {
      leaf.ready.clear();
      ready_dirty = true;
    }
  }

  void pop(Leaf& leaf) {
    leaf.stack.pop_back();
    reset(leaf);
  }

  void finish(ExitKind kind) {
    done = true;
    exit_kind = kind;
  }

  // ---- structure ----

  Action resolve(Leaf& leaf) {
    for (;;) {
      if (leaf.stack.empty()) return Action::Done;
      Frame& f = leaf.stack.back();
      if (f.kind == Frame::Kind::LoopExit) return Action::Internal;
      if (f.kind == Frame::Kind::Loop) {
        bool again = false;
        if (cfg.repeat.kind == RepeatPolicy::Kind::Fixed) {
          again = f.remaining > 0;
          if (again) --f.remaining;
        } else {
          again = leaf.rng.uniform() < cfg.repeat.q;
        }
        if (!again) {
          f.kind = Frame::Kind::LoopExit;
          return Action::Internal;
        }
        Process body = f.proc;
        leaf.stack.push_back(Frame{Frame::Kind::Exec, body, 0});
        continue;
      }
      const auto& node = f.proc.node().value;
      if (const auto* s = std::get_if<proc::Seq>(&node)) {
        Process first = s->first;
        Process second = s->second;
        leaf.stack.back() = Frame{Frame::Kind::Exec, second, 0};
        leaf.stack.push_back(Frame{Frame::Kind::Exec, first, 0});
        continue;
      }
      if (const auto* r = std::get_if<proc::Repeat>(&node)) {
        Process body = r->body;
        leaf.stack.back() = Frame{Frame::Kind::Loop, body, cfg.repeat.count};
        continue;
      }
      if (std::holds_alternative<proc::Input>(node) || std::holds_alternative<proc::Output>(node)) {
        return leaf.registered ? Action::Waiting : Action::Internal;
      }
      if (const auto* s = std::get_if<proc::Sde>(&node)) {
        if (leaf.exit_pending) return Action::Internal;
        if (!leaf.registered) {
          if (!holds(s->block.domain)) return Action::Internal;
          leaf.registered = true;
        }
        return Action::Evolving;
      }
      if (std::holds_alternative<proc::Interrupt>(node)) {
        if (leaf.exit_pending || !leaf.registered) return Action::Internal;
        return Action::Evolving;
      }
      return Action::Internal;
    }
  }

  // ---- discrete moves ----

  StepLabel internal_move(Leaf& leaf) {
    Frame& f = leaf.stack.back();
    if (f.kind == Frame::Kind::LoopExit) {
      tau(leaf);
      pop(leaf);
      return {};
    }
    Process current = f.proc;
    return std::visit(overloaded{
                          [&](const proc::Skip&) {
                            tau(leaf);
                            pop(leaf);
                            return StepLabel{};
                          },
                          [&](const proc::Assign& a) {
                            slots[table.index(a.var)] = eval(a.value);
                            tau(leaf);
                            pop(leaf);
                            return StepLabel{};
                          },
                          [&](const proc::Cond& c) {
                            const bool g = holds(c.guard);
                            tau(leaf);
                            if (g) {
                              leaf.stack.back().proc = c.body;
                            } else {
                              pop(leaf);
                            }
                            return StepLabel{};
                          },
                          [&](const proc::PChoice& c) {
                            const Side side = pchoice_branch(c.prob, leaf.rng.uniform());
                            tau(leaf);
                            leaf.stack.back().proc = side == Side::Left ? c.left : c.right;
                            return StepLabel{};
                          },
                          [&](const proc::Input& in) {
                            post(leaf, in.chan, Direction::Input);
                            return StepLabel{};
                          },
                          [&](const proc::Output& out) {
                            post(leaf, out.chan, Direction::Output);
                            return StepLabel{};
                          },
                          [&](const proc::Sde&) {
                            tau(leaf);
                            pop(leaf);
                            return StepLabel{};
                          },
                          [&](const proc::Interrupt& i) {
                            if (leaf.exit_pending || !holds(i.block.domain)) {
                              tau(leaf);
                              pop(leaf);
                              return StepLabel{};
                            }
                            for (const auto& b : i.branches) {
                              leaf.ready.push_back(ReadyItem{b.event.chan, b.event.direction, tr});
                            }
                            leaf.registered = true;
                            ready_dirty = true;
                            return StepLabel{};
                          },
                          [&](const auto&) -> StepLabel { throw std::logic_error("unexpected process in leaf"); },
                      },
                      current.node().value);
  }

  void post(Leaf& leaf, const std::string& chan, Direction dir) {
    leaf.ready.push_back(ReadyItem{chan, dir, tr});
    leaf.registered = true;
    ready_dirty = true;
  }

  std::vector<Offer> offers(const std::vector<Action>& actions) const {
    std::vector<Offer> out;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      const Leaf& leaf = leaves[i];
      if (actions[i] != Action::Waiting && actions[i] != Action::Evolving) continue;
      const auto& node = leaf.stack.back().proc.node().value;
      if (const auto* in = std::get_if<proc::Input>(&node)) {
        out.push_back({i, Direction::Input, in->chan, -1});
      } else if (const auto* o = std::get_if<proc::Output>(&node)) {
        out.push_back({i, Direction::Output, o->chan, -1});
      } else if (const auto* intr = std::get_if<proc::Interrupt>(&node)) {
        for (std::size_t k = 0; k < intr->branches.size(); ++k) {
          const auto& ev = intr->branches[k].event;
          out.push_back({i, ev.direction, ev.chan, static_cast<int>(k)});
        }
      }
    }
    return out;
  }

  const Process::Branch& branch_of(const Offer& o) const {
    const auto& intr = std::get<proc::Interrupt>(leaves[o.leaf].stack.back().proc.node().value);
    return intr.branches[static_cast<std::size_t>(o.branch)];
  }

  StepLabel communicate(const Offer& out, const Offer& in) {
    double value = 0.0;
    if (out.branch < 0) {
      value = eval(std::get<proc::Output>(leaves[out.leaf].stack.back().proc.node().value).value);
    } else {
      value = eval(branch_of(out).event.value);
    }
    const std::string& var = in.branch < 0
                                 ? std::get<proc::Input>(leaves[in.leaf].stack.back().proc.node().value).var
                                 : branch_of(in).event.var;
    slots[table.index(var)] = value;
    tr.push_back(TimedItem::comm(out.chan, value, now));
    for (const Offer* o : {&out, &in}) {
      Leaf& leaf = leaves[o->leaf];
      leaf.local.push_back(tr.back());
      if (o->branch < 0) {
        pop(leaf);
      } else {
        Process body = branch_of(*o).body;
        leaf.stack.back().proc = body;
        reset(leaf);
      }
    }
    return StepLabel{StepLabel::Kind::Comm, out.chan, value};
  }

  std::optional<StepLabel> synchronize(const std::vector<Action>& actions) {
    auto all = offers(actions);
    struct Pair {
      std::size_t out;
      std::size_t in;
    };
    std::vector<Pair> pairs;
    for (std::size_t a = 0; a < all.size(); ++a) {
      if (all[a].dir != Direction::Output) continue;
      for (std::size_t b = 0; b < all.size(); ++b) {
        if (all[b].dir == Direction::Input && all[b].chan == all[a].chan && all[b].leaf != all[a].leaf) {
          pairs.push_back({a, b});
        }
      }
    }
    if (pairs.empty()) return std::nullopt;

    // plain pairs compete individually, an interrupt competes once with all its ready branches
    struct Candidate {
      int interrupt_leaf;  // -1 for a plain pair
      std::vector<std::size_t> pairs;
    };
    std::vector<Candidate> cands;
    std::vector<int> interrupt_slot(leaves.size(), -1);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const Offer& o = all[pairs[k].out];
      const Offer& i = all[pairs[k].in];
      if (o.branch < 0 && i.branch < 0) {
        cands.push_back({-1, {k}});
        continue;
      }
      for (const Offer* side : {&o, &i}) {
        if (side->branch < 0) continue;
        int& slot = interrupt_slot[side->leaf];
        if (slot < 0) {
          slot = static_cast<int>(cands.size());
          cands.push_back({static_cast<int>(side->leaf), {}});
        }
        cands[static_cast<std::size_t>(slot)].pairs.push_back(k);
      }
    }
    const Candidate& c = cands[cands.size() > 1 ? sched.below(cands.size()) : 0];
    std::size_t chosen = c.pairs.front();
    if (c.interrupt_leaf >= 0) {
      std::vector<Rational> weights;
      for (std::size_t k : c.pairs) {
        const Offer& o = all[pairs[k].out];
        const Offer& own = static_cast<int>(o.leaf) == c.interrupt_leaf ? o : all[pairs[k].in];
        weights.push_back(branch_of(own).weight);
      }
      const double u = leaves[static_cast<std::size_t>(c.interrupt_leaf)].rng.uniform();
      chosen = c.pairs[weighted_pick(weights, u)];
    }
    return communicate(all[pairs[chosen].out], all[pairs[chosen].in]);
  }

  // ---- time ----

  const SdeBlock& block_of(const Leaf& leaf) const {
    const auto& node = leaf.stack.back().proc.node().value;
    if (const auto* s = std::get_if<proc::Sde>(&node)) return s->block;
    return std::get<proc::Interrupt>(node).block;
  }

  void load_state(const SdeIntegrator& integ, const std::vector<double>& s) {
    for (std::size_t i = 0; i < s.size(); ++i) slots[integ.state_slots()[i]] = s[i];
  }

  void draw_segment(Leaf& leaf) {
    SdeIntegrator& integ = integrator(block_of(leaf));
    Segment& seg = leaf.seg;
    const std::size_t d = integ.dim();
    seg.sa.resize(d);
    seg.sb.resize(d);
    for (std::size_t i = 0; i < d; ++i) seg.sa[i] = slots[integ.state_slots()[i]];
    seg.ta = now;
    seg.tb = next_grid_time(now, cfg.dt, cfg.t_max);
    const double h = seg.tb - seg.ta;
    auto dW = brownian_increment(integ.brownian_dim(), h, leaf.rng);
    integ.step(slots.data(), h, dW.data(), seg.sb.data());
    seg.active = true;
    seg.texit = kInf;
    seg.theta_exit = 1.0;

    load_state(integ, seg.sb);
    const bool ok = integ.domain(slots.data());
    if (!ok) {
      std::vector<double> probe(d);
      auto at = [&](double theta) {
        for (std::size_t i = 0; i < d; ++i) probe[i] = seg.sa[i] + theta * (seg.sb[i] - seg.sa[i]);
        load_state(integ, probe);
        return integ.domain(slots.data());
      };
      seg.theta_exit = bisect_exit(at, cfg.boundary_tolerance() / h);
      seg.texit = seg.theta_exit >= 1.0 ? seg.tb : seg.ta + seg.theta_exit * h;
    }
    load_state(integ, seg.sa);
  }

  void advance_to(Leaf& leaf, double t) {
    SdeIntegrator& integ = integrator(block_of(leaf));
    Segment& seg = leaf.seg;
    if (t == seg.texit) {
      const double theta = seg.theta_exit;
      std::vector<double> s(seg.sa.size());
      for (std::size_t i = 0; i < s.size(); ++i) s[i] = seg.sa[i] + theta * (seg.sb[i] - seg.sa[i]);
      load_state(integ, s);
      leaf.exit_pending = true;
      seg.active = false;
      return;
    }
    if (t == seg.tb) {
      load_state(integ, seg.sb);
      seg.active = false;
      return;
    }
    const double theta = (t - seg.ta) / (seg.tb - seg.ta);
    std::vector<double> s(seg.sa.size());
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = seg.sa[i] + theta * (seg.sb[i] - seg.sa[i]);
    load_state(integ, s);
  }

  bool external(const std::string& chan, std::size_t self) const {
    for (std::size_t k = 0; k < leaves.size(); ++k) {
      if (k != self && leaves[k].alphabet.count(chan)) return false;
    }
    return true;
  }

  std::optional<StepLabel> delay(const std::vector<Action>& actions) {
    std::vector<std::size_t> evolving;
    bool all_done = true;
    bool all_external = true;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      if (actions[i] == Action::Evolving) evolving.push_back(i);
      if (actions[i] != Action::Done) all_done = false;
      if (actions[i] == Action::Waiting) {
        for (const auto& r : leaves[i].ready) all_external = all_external && external(r.chan, i);
      }
    }
    if (evolving.empty()) {
      if (all_done) {
        finish(ExitKind::Terminated);
        return std::nullopt;
      }
      if (!all_external) {
        finish(ExitKind::Deadlock);
        return std::nullopt;
      }
      finish(ExitKind::Timeout);
      if (now >= cfg.t_max) return std::nullopt;
      const double d = cfg.t_max - now;
      now = cfg.t_max;
      record();
      return StepLabel{StepLabel::Kind::Delay, {}, d};
    }
    if (now >= cfg.t_max) {
      finish(ExitKind::Timeout);
      return std::nullopt;
    }
    double t_next = kInf;
    for (std::size_t i : evolving) {
      Leaf& leaf = leaves[i];
      if (!leaf.seg.active) draw_segment(leaf);
      t_next = std::min({t_next, leaf.seg.tb, leaf.seg.texit});
    }
    for (std::size_t i : evolving) advance_to(leaves[i], t_next);
    const double d = t_next - now;
    now = t_next;
    instant_steps = 0;
    record();
    return StepLabel{StepLabel::Kind::Delay, {}, d};
  }

  std::optional<StepLabel> step() {
    if (done) return std::nullopt;
    std::vector<Action> actions(leaves.size());
    std::vector<std::size_t> internal;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      actions[i] = resolve(leaves[i]);
      if (actions[i] == Action::Internal) internal.push_back(i);
    }
    if (!internal.empty()) {
      if (instant_steps >= cfg.max_instant_steps) {
        finish(ExitKind::StepLimit);
        return std::nullopt;
      }
      const std::size_t pick = internal.size() > 1 ? internal[sched.below(internal.size())] : internal.front();
      StepLabel label = internal_move(leaves[pick]);
      ++instant_steps;
      record();
      return label;
    }
    if (instant_steps < cfg.max_instant_steps) {
      if (auto label = synchronize(actions)) {
        ++instant_steps;
        record();
        return label;
      }
    } else if (!offers(actions).empty()) {
      finish(ExitKind::StepLimit);
      return std::nullopt;
    }
    return delay(actions);
  }

  ProcState state() const {
    ProcState s;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (!std::isnan(slots[i])) s.vals.emplace(table.names()[i], slots[i]);
    }
    s.now = now;
    s.tr = tr;
    s.rdy = ready_union();
    return s;
  }

  Process residual() const {
    std::vector<Process> parts;
    for (const auto& leaf : leaves) {
      if (leaf.stack.empty()) continue;
      std::optional<Process> acc;
      for (const auto& f : leaf.stack) {  // bottom to top
        Process p = f.kind == Frame::Kind::Exec ? f.proc : Process::repeat(f.proc);
        acc = acc ? Process::seq(p, *acc) : p;
      }
      parts.push_back(*acc);
    }
    if (parts.empty()) return Process::skip();
    Process out = parts.back();
    for (std::size_t i = parts.size() - 1; i-- > 0;) out = Process::parallel(parts[i], out);
    return out;
  }
};

Machine::Machine(const Process& p, const ProcState& init, std::uint64_t seed, const RunConfig& cfg)
    : impl_(std::make_unique<Impl>(p, init, seed, cfg)) {}
Machine::~Machine() = default;
Machine::Machine(Machine&&) noexcept = default;
Machine& Machine::operator=(Machine&&) noexcept = default;

std::optional<StepLabel> Machine::step() { return impl_->step(); }
bool Machine::finished() const { return impl_->done; }
ExitKind Machine::exit() const { return impl_->exit_kind; }
ProcState Machine::state() const { return impl_->state(); }
Process Machine::residual() const { return impl_->residual(); }
const Flow& Machine::flow() const { return impl_->flow; }

RunRecord Machine::finish() && {
  RunRecord rec;
  rec.seed = impl_->seed;
  rec.final = impl_->state();
  rec.trace = impl_->tr;
  rec.exit = impl_->exit_kind;
  for (auto& leaf : impl_->leaves) rec.local_traces.push_back(std::move(leaf.local));
  rec.flow = std::move(impl_->flow);
  rec.flow.set_trace(rec.trace);
  return rec;
}

std::optional<StepOutcome> step(const Process& p, const ProcState& s, std::uint64_t seed, const RunConfig& cfg) {
  Machine m(p, s, seed, cfg);
  auto label = m.step();
  if (!label) return std::nullopt;
  StepOutcome out{*label, m.residual(), m.state(), {}};
  out.segment = m.flow();
  out.segment.set_trace(out.state.tr);
  return out;
}

RunRecord run(const Process& p, const Valuation& init, std::uint64_t seed, const RunConfig& cfg) {
  auto diags = validate(p);
  if (!diags.empty()) throw std::invalid_argument("invalid program: " + diags.front().message);
  ProcState s;
  s.vals = init;
  Machine m(p, s, seed, cfg);
  while (m.step()) {
  }
  return std::move(m).finish();
}

}  // namespace shcsp
