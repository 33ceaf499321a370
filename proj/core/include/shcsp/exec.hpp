#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "shcsp/config.hpp"
#include "shcsp/flow.hpp"
#include "shcsp/process.hpp"
#include "shcsp/trace.hpp"

namespace shcsp {

enum class ExitKind { Terminated, Timeout, Deadlock, StepLimit };

std::string_view exit_name(ExitKind kind);  // "terminated", "timeout", "deadlock", "step-limit"
ExitKind exit_from_name(std::string_view name);

struct RunRecord {
  std::uint64_t seed = 0;
  ProcState final;
  Flow flow;
  TimedTrace trace;
  ExitKind exit = ExitKind::Terminated;
  std::vector<TimedTrace> local_traces;  // one per top-level parallel component
};

struct StepLabel {
  enum class Kind { Tau, Comm, Delay };

  Kind kind = Kind::Tau;
  std::string chan;
  double value = 0.0;  // communicated value or delay length

  std::string text() const;  // "tau", "ch.c" or the delay
};

/// Index j (0-based) with sum(w[0..j)) / W <= u < sum(w[0..j]) / W, compared
/// exactly.
std::size_t weighted_pick(const std::vector<Rational>& weights, double u);

enum class Side { Left, Right };

/// Left iff u <= p.
Side pchoice_branch(const Rational& p, double u);

/// Stepwise interpreter for one sampled run. Parallel components are the
/// leaves of the top-level parallel tree; each draws from its own random
/// stream and a separate stream schedules interleavings.
class Machine {
 public:
  Machine(const Process& p, const ProcState& init, std::uint64_t seed, const RunConfig& cfg);
  ~Machine();
  Machine(Machine&&) noexcept;
  Machine& operator=(Machine&&) noexcept;

  /// Applies one rule; nullopt once the run has ended (see exit()).
  std::optional<StepLabel> step();

  bool finished() const;
  ExitKind exit() const;
  ProcState state() const;
  /// Remaining program; finished components are dropped and a loop prints
  /// as its repetition.
  Process residual() const;
  const Flow& flow() const;

  RunRecord finish() &&;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct StepOutcome {
  StepLabel label;
  Process next;
  ProcState state;
  Flow segment;
};

/// One transition from (p, s); nullopt when none applies.
std::optional<StepOutcome> step(const Process& p, const ProcState& s, std::uint64_t seed, const RunConfig& cfg);

/// Runs to completion. Throws std::invalid_argument for an invalid program
/// and EvalError when an expression cannot be evaluated.
RunRecord run(const Process& p, const Valuation& init, std::uint64_t seed, const RunConfig& cfg);

}  // namespace shcsp
