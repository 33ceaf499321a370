#include "shcsp/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace shcsp {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void Flow::append(double time, const double* vals, std::size_t trace_len, std::size_t ready_id) {
  times_.push_back(time);
  values_.insert(values_.end(), vals, vals + vars_.size());
  trace_len_.push_back(trace_len);
  ready_ids_.push_back(ready_id);
}

std::size_t Flow::add_ready_set(std::vector<ReadyItem> rdy) {
  if (!ready_sets_.empty() && ready_sets_.back() == rdy) return ready_sets_.size() - 1;
  ready_sets_.push_back(std::move(rdy));
  return ready_sets_.size() - 1;
}

ProcState Flow::snapshot(std::size_t row) const {
  ProcState s;
  const double* v = values(row);
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    if (!std::isnan(v[i])) s.vals.emplace(vars_[i], v[i]);
  }
  s.now = times_[row];
  s.tr.assign(trace_.begin(), trace_.begin() + static_cast<std::ptrdiff_t>(trace_len_[row]));
  if (!ready_sets_.empty()) s.rdy = ready_sets_[ready_ids_[row]];
  return s;
}

std::size_t Flow::index_at(double t) const {
  if (times_.empty() || t < times_.front() || t > times_.back()) {
    throw std::out_of_range("time " + format_double(t) + " outside the recorded flow");
  }
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  return static_cast<std::size_t>(it - times_.begin()) - 1;
}

void Flow::write_csv(std::ostream& out) const {
  out << "time";
  for (const auto& v : vars_) out << ',' << v;
  out << '\n';
  for (std::size_t r = 0; r < size(); ++r) {
    out << format_double(times_[r]);
    const double* v = values(r);
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      out << ',';
      if (!std::isnan(v[i])) out << format_double(v[i]);
    }
    out << '\n';
  }
}

}  // namespace shcsp
