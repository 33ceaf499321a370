#pragma once

#include <cstddef>
#include <string>

namespace shcsp {

/// How many times `P*` runs: a fixed count, or a fresh geometric count where
/// each further iteration happens with probability q.
struct RepeatPolicy {
  enum class Kind { Fixed, Geometric };

  Kind kind = Kind::Fixed;
  unsigned count = 1;
  double q = 0.5;

  static RepeatPolicy fixed(unsigned n) { return {Kind::Fixed, n, 0.0}; }
  static RepeatPolicy geometric(double q) { return {Kind::Geometric, 0, q}; }
};

struct RunConfig {
  double dt = 1e-3;  // SDE step
  double t_max = 10.0;
  std::size_t max_instant_steps = 10000;
  RepeatPolicy repeat;

  /// Bisection tolerance for boundary exits.
  double boundary_tolerance() const { return 1e-9 * (t_max > 1.0 ? t_max : 1.0); }

  /// Throws std::invalid_argument on a non-positive dt, negative t_max or
  /// zero step budget.
  void check() const;
};

}  // namespace shcsp
