#pragma once

#include <functional>
#include <ostream>
#include <vector>

#include "shcsp/config.hpp"
#include "shcsp/eval.hpp"
#include "shcsp/process.hpp"
#include "shcsp/rng.hpp"
#include "shcsp/trace.hpp"

namespace shcsp {

/// `dim` independent N(0, dt) samples.
std::vector<double> brownian_increment(std::size_t dim, double dt, Rng& rng);

/// One Euler-Maruyama step s + b(s) dt + sigma(s) dW. `env` supplies every
/// variable other than the block's state, which is taken from `s`.
std::vector<double> em_step(const std::vector<double>& s, const SdeBlock& block, const Valuation& env, double dt,
                            const std::vector<double>& dW);

/// Block compiled against a symbol table, stepping a full slot vector.
class SdeIntegrator {
 public:
  SdeIntegrator(const SdeBlock& block, const SymbolTable& table);

  std::size_t dim() const { return slots_.size(); }
  std::size_t brownian_dim() const { return m_; }
  const std::vector<std::size_t>& state_slots() const { return slots_; }

  /// Writes the state after a step of length h with increment dW into `out`.
  void step(const double* slots, double h, const double* dW, double* out) const;
  bool domain(const double* slots) const { return domain_(slots); }

 private:
  std::vector<std::size_t> slots_;
  std::size_t m_;
  std::vector<CompiledExpr> drift_;
  std::vector<CompiledExpr> diffusion_;  // row-major dim x m
  CompiledBool domain_;
};

/// First grid point k*dt strictly after `now`, capped at t_max.
double next_grid_time(double now, double dt, double t_max);

/// Given a predicate that holds at 0 and fails at 1, narrows the crossing to
/// a bracket of width <= tol and returns its failing end.
double bisect_exit(const std::function<bool(double)>& holds, double tol);

struct SdePath {
  enum class Exit { Boundary, Interrupted, Timeout };

  std::vector<double> times;
  std::vector<std::vector<double>> states;
  Exit exit = Exit::Timeout;
  double exit_time = 0.0;
  std::vector<double> exit_state;

  /// `time,s1,...,sn`.
  void write_csv(std::ostream& out, const std::vector<std::string>& vars) const;
};

/// Readiness poll at a step boundary: true when a partner is ready.
using ReadinessPoll = std::function<bool(double time, const std::vector<double>& state)>;

/// Runs the block from `entry` until its domain fails (boundary, refined by
/// bisection), the poll reports a partner (interrupted) or t_max (timeout).
/// Throws EvalError on a non-finite state.
SdePath evolve(const SdeBlock& block, const ProcState& entry, const RunConfig& cfg, Rng& rng,
               const ReadinessPoll& poll = {});

}  // namespace shcsp
