#pragma once

#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "shcsp/trace.hpp"

namespace shcsp {

/// Sampled history of one run. Each row is the state right after a discrete
/// step or a delay step; the row before an event point is its left limit.
/// Variables absent from the state are stored as NaN.
class Flow {
 public:
  Flow() = default;
  explicit Flow(std::vector<std::string> vars) : vars_(std::move(vars)) {}

  const std::vector<std::string>& vars() const { return vars_; }
  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }

  double time(std::size_t row) const { return times_[row]; }
  const double* values(std::size_t row) const { return values_.data() + row * vars_.size(); }
  std::size_t trace_length(std::size_t row) const { return trace_len_[row]; }
  std::size_t ready_id(std::size_t row) const { return ready_ids_[row]; }

  void append(double time, const double* vals, std::size_t trace_len, std::size_t ready_id);

  std::size_t add_ready_set(std::vector<ReadyItem> rdy);
  const std::vector<ReadyItem>& ready_set(std::size_t id) const { return ready_sets_[id]; }
  std::size_t ready_set_count() const { return ready_sets_.size(); }

  void set_trace(TimedTrace trace) { trace_ = std::move(trace); }
  const TimedTrace& trace() const { return trace_; }

  ProcState snapshot(std::size_t row) const;

  /// Last row whose time is <= t (right-continuous lookup). Throws
  /// std::out_of_range outside [first time, last time].
  std::size_t index_at(double t) const;

  double start_time() const { return times_.front(); }
  double end_time() const { return times_.back(); }

  /// `time,var1,...` with %.17g numbers; unbound values are left empty.
  void write_csv(std::ostream& out) const;

 private:
  std::vector<std::string> vars_;
  std::vector<double> times_;
  std::vector<double> values_;
  std::vector<std::size_t> trace_len_;
  std::vector<std::size_t> ready_ids_;
  std::vector<std::vector<ReadyItem>> ready_sets_;
  TimedTrace trace_;
};

std::string format_double(double v);  // %.17g

}  // namespace shcsp
