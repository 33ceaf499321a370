#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "shcsp/eval.hpp"
#include "shcsp/process.hpp"

namespace shcsp {

/// `<ch.c, b>` or an internal `<tau, b>` item.
struct TimedItem {
  enum class Kind { Comm, Internal };

  Kind kind = Kind::Internal;
  std::string chan;  // empty for internal items
  double value = 0.0;
  double time = 0.0;

  static TimedItem comm(std::string chan, double value, double time);
  static TimedItem internal(double time);
  bool is_comm() const { return kind == Kind::Comm; }
};

bool operator==(const TimedItem& a, const TimedItem& b);
bool operator<(const TimedItem& a, const TimedItem& b);

using TimedTrace = std::vector<TimedItem>;

/// Readiness `h.ch?` / `h.ch!`.
struct ReadyItem {
  std::string chan;
  Direction direction = Direction::Input;
  TimedTrace prefix;
};

bool operator==(const ReadyItem& a, const ReadyItem& b);
bool operator<(const ReadyItem& a, const ReadyItem& b);

/// Number of communications on `chan` in `h`.
std::size_t count_on_channel(const TimedTrace& h, const std::string& chan);

/// Readiness identity used for matching: same channel and direction and the
/// same number of earlier communications on that channel.
bool same_readiness(const ReadyItem& a, const ReadyItem& b);

struct ProcState {
  Valuation vals;
  double now = 0.0;
  TimedTrace tr;
  std::vector<ReadyItem> rdy;
};

bool operator==(const ProcState& a, const ProcState& b);

bool is_time_sorted(const TimedTrace& t);
std::set<std::string> trace_channels(const TimedTrace& t);

/// Communications on `chans`, in order; internal items are dropped.
TimedTrace project(const TimedTrace& t, const std::set<std::string>& chans);

/// Alphabetized parallel over `sync`: every trace whose projections onto the
/// channels of `a` and of `b` give back `a` and `b`, that agrees with both on
/// `sync` and mentions no other channel. Internal items stay private to
/// their side. Sorted; empty when the traces are incompatible.
std::vector<TimedTrace> merge_traces(const TimedTrace& a, const TimedTrace& b, const std::set<std::string>& sync);

class MergeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// State of a parallel composition. Throws MergeError unless the states are
/// parallelable (disjoint variables, equal clocks) and the traces merge.
/// Without `sync` the channels common to both traces synchronize.
ProcState merge_states(const ProcState& a, const ProcState& b);
ProcState merge_states(const ProcState& a, const ProcState& b, const std::set<std::string>& sync);

}  // namespace shcsp
