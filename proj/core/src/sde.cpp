#include "shcsp/sde.hpp"

#include <cmath>
#include <stdexcept>

#include "shcsp/flow.hpp"

namespace shcsp {

void RunConfig::check() const {
  if (!(dt > 0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (!(t_max >= 0) || !std::isfinite(t_max)) throw std::invalid_argument("t_max must be non-negative");
  if (max_instant_steps == 0) throw std::invalid_argument("max_instant_steps must be at least 1");
  if (repeat.kind == RepeatPolicy::Kind::Geometric && !(repeat.q >= 0 && repeat.q < 1)) {
    throw std::invalid_argument("geometric repeat probability must lie in [0, 1)");
  }
}

std::vector<double> brownian_increment(std::size_t dim, double dt, Rng& rng) {
  if (!(dt > 0)) throw std::invalid_argument("brownian_increment: dt must be positive");
  const double scale = std::sqrt(dt);
  std::vector<double> out(dim);
  for (auto& x : out) x = scale * rng.normal();
  return out;
}

namespace {

SymbolTable table_for(const SdeBlock& block, const Valuation& env) {
  std::vector<std::string> names(block.vars);
  for (const auto& [k, v] : env) names.push_back(k);
  return SymbolTable(std::move(names));
}

std::vector<double> slots_for(const SymbolTable& table, const SdeBlock& block, const std::vector<double>& s,
                              const Valuation& env) {
  std::vector<double> slots(table.size(), std::nan(""));
  for (const auto& [k, v] : env) slots[table.index(k)] = v;
  for (std::size_t i = 0; i < block.vars.size(); ++i) slots[table.index(block.vars[i])] = s[i];
  return slots;
}

}  // namespace

std::vector<double> em_step(const std::vector<double>& s, const SdeBlock& block, const Valuation& env, double dt,
                            const std::vector<double>& dW) {
  if (s.size() != block.dim() || dW.size() != block.brownian_dim()) {
    throw std::invalid_argument("em_step: dimension mismatch");
  }
  SymbolTable table = table_for(block, env);
  SdeIntegrator integ(block, table);
  auto slots = slots_for(table, block, s, env);
  std::vector<double> out(block.dim());
  integ.step(slots.data(), dt, dW.data(), out.data());
  return out;
}

SdeIntegrator::SdeIntegrator(const SdeBlock& block, const SymbolTable& table)
    : m_(block.brownian_dim()), domain_(compile(block.domain, table)) {
  for (const auto& v : block.vars) slots_.push_back(table.index(v));
  for (const auto& e : block.drift) drift_.push_back(compile(e, table));
  for (const auto& row : block.diffusion) {
    for (const auto& e : row) diffusion_.push_back(compile(e, table));
  }
}

void SdeIntegrator::step(const double* slots, double h, const double* dW, double* out) const {
  const std::size_t d = slots_.size();
  for (std::size_t i = 0; i < d; ++i) {
    double v = slots[slots_[i]] + drift_[i](slots) * h;
    for (std::size_t j = 0; j < m_; ++j) v += diffusion_[i * m_ + j](slots) * dW[j];
    if (!std::isfinite(v)) throw EvalError("non-finite state in SDE integration");
    out[i] = v;
  }
}

double next_grid_time(double now, double dt, double t_max) {
  double k = std::floor(now / dt);
  double t = k * dt;
  while (t > now) t = --k * dt;
  while (t <= now) t = ++k * dt;
  return t < t_max ? t : t_max;
}

double bisect_exit(const std::function<bool(double)>& holds, double tol) {
  double lo = 0.0;
  double hi = 1.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (holds(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

void SdePath::write_csv(std::ostream& out, const std::vector<std::string>& vars) const {
  out << "time";
  for (const auto& v : vars) out << ',' << v;
  out << '\n';
  for (std::size_t r = 0; r < times.size(); ++r) {
    out << format_double(times[r]);
    for (double x : states[r]) out << ',' << format_double(x);
    out << '\n';
  }
}

SdePath evolve(const SdeBlock& block, const ProcState& entry, const RunConfig& cfg, Rng& rng,
               const ReadinessPoll& poll) {
  cfg.check();
  Valuation env = entry.vals;
  std::vector<double> s(block.dim());
  for (std::size_t i = 0; i < block.dim(); ++i) {
    auto it = env.find(block.vars[i]);
    if (it == env.end()) throw EvalError("unbound variable " + block.vars[i]);
    s[i] = it->second;
  }
  SymbolTable table = table_for(block, env);
  SdeIntegrator integ(block, table);
  auto slots = slots_for(table, block, s, env);
  auto load = [&](const std::vector<double>& state) {
    for (std::size_t i = 0; i < state.size(); ++i) slots[integ.state_slots()[i]] = state[i];
  };

  SdePath path;
  double now = entry.now;
  path.times.push_back(now);
  path.states.push_back(s);
  auto finish = [&](SdePath::Exit kind) {
    path.exit = kind;
    path.exit_time = path.times.back();
    path.exit_state = path.states.back();
    return path;
  };
  if (!integ.domain(slots.data())) return finish(SdePath::Exit::Boundary);

  std::vector<double> next(block.dim());
  std::vector<double> probe(block.dim());
  const double tol = cfg.boundary_tolerance();
  while (now < cfg.t_max) {
    const double t_next = next_grid_time(now, cfg.dt, cfg.t_max);
    const double h = t_next - now;
    auto dW = brownian_increment(block.brownian_dim(), h, rng);
    integ.step(slots.data(), h, dW.data(), next.data());
    load(next);
    if (!integ.domain(slots.data())) {
      auto at = [&](double theta) {
        for (std::size_t i = 0; i < s.size(); ++i) probe[i] = s[i] + theta * (next[i] - s[i]);
        load(probe);
        return integ.domain(slots.data());
      };
      const double theta = bisect_exit(at, tol / h);
      at(theta);
      path.times.push_back(now + theta * h);
      path.states.push_back(probe);
      return finish(SdePath::Exit::Boundary);
    }
    now = t_next;
    s = next;
    path.times.push_back(now);
    path.states.push_back(s);
    if (poll && poll(now, s)) return finish(SdePath::Exit::Interrupted);
  }
  return finish(SdePath::Exit::Timeout);
}

}  // namespace shcsp
