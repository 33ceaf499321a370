#include "shcsp/trace.hpp"

#include <algorithm>
#include <tuple>

namespace shcsp {

TimedItem TimedItem::comm(std::string chan, double value, double time) {
  return TimedItem{Kind::Comm, std::move(chan), value, time};
}

TimedItem TimedItem::internal(double time) { return TimedItem{Kind::Internal, {}, 0.0, time}; }

bool operator==(const TimedItem& a, const TimedItem& b) {
  return a.kind == b.kind && a.chan == b.chan && a.value == b.value && a.time == b.time;
}

bool operator<(const TimedItem& a, const TimedItem& b) {
  return std::tie(a.time, a.kind, a.chan, a.value) < std::tie(b.time, b.kind, b.chan, b.value);
}

bool operator==(const ReadyItem& a, const ReadyItem& b) {
  return a.chan == b.chan && a.direction == b.direction && a.prefix == b.prefix;
}

bool operator<(const ReadyItem& a, const ReadyItem& b) {
  return std::tie(a.chan, a.direction, a.prefix) < std::tie(b.chan, b.direction, b.prefix);
}

std::size_t count_on_channel(const TimedTrace& h, const std::string& chan) {
  return static_cast<std::size_t>(
      std::count_if(h.begin(), h.end(), [&](const TimedItem& i) { return i.is_comm() && i.chan == chan; }));
}

bool same_readiness(const ReadyItem& a, const ReadyItem& b) {
  return a.chan == b.chan && a.direction == b.direction &&
         count_on_channel(a.prefix, a.chan) == count_on_channel(b.prefix, b.chan);
}

bool operator==(const ProcState& a, const ProcState& b) {
  return a.vals == b.vals && a.now == b.now && a.tr == b.tr && a.rdy == b.rdy;
}

bool is_time_sorted(const TimedTrace& t) {
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i].time < t[i - 1].time) return false;
  }
  return true;
}

std::set<std::string> trace_channels(const TimedTrace& t) {
  std::set<std::string> out;
  for (const auto& i : t) {
    if (i.is_comm()) out.insert(i.chan);
  }
  return out;
}

TimedTrace project(const TimedTrace& t, const std::set<std::string>& chans) {
  TimedTrace out;
  for (const auto& i : t) {
    if (i.is_comm() && chans.count(i.chan)) out.push_back(i);
  }
  return out;
}

namespace {

struct Merger {
  const TimedTrace& a;
  const TimedTrace& b;
  std::vector<char> a_shared;  // item is a communication on a channel of the other side
  std::vector<char> b_shared;
  const std::set<std::string>& sync;
  TimedTrace a_sync;
  TimedTrace current;
  std::vector<TimedTrace> results;

  bool fits(const TimedItem& item) const { return current.empty() || current.back().time <= item.time; }

  void go(std::size_t i, std::size_t j) {
    if (i == a.size() && j == b.size()) {
      if (project(current, sync) == a_sync) results.push_back(current);
      return;
    }
    if (i < a.size() && !a_shared[i] && fits(a[i])) {
      current.push_back(a[i]);
      go(i + 1, j);
      current.pop_back();
    }
    if (j < b.size() && !b_shared[j] && fits(b[j])) {
      current.push_back(b[j]);
      go(i, j + 1);
      current.pop_back();
    }
    // a channel seen by both sides must be the same event in both projections
    if (i < a.size() && j < b.size() && a_shared[i] && b_shared[j] && a[i] == b[j] && fits(a[i])) {
      current.push_back(a[i]);
      go(i + 1, j + 1);
      current.pop_back();
    }
  }
};

std::vector<char> shared_flags(const TimedTrace& t, const std::set<std::string>& other) {
  std::vector<char> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = t[i].is_comm() && other.count(t[i].chan);
  return out;
}

}  // namespace

std::vector<TimedTrace> merge_traces(const TimedTrace& a, const TimedTrace& b, const std::set<std::string>& sync) {
  TimedTrace a_sync = project(a, sync);
  if (a_sync != project(b, sync)) return {};
  Merger m{a, b, shared_flags(a, trace_channels(b)), shared_flags(b, trace_channels(a)), sync, std::move(a_sync), {}, {}};
  m.current.reserve(a.size() + b.size());
  m.go(0, 0);
  std::sort(m.results.begin(), m.results.end());
  m.results.erase(std::unique(m.results.begin(), m.results.end()), m.results.end());
  return std::move(m.results);
}

ProcState merge_states(const ProcState& a, const ProcState& b) {
  std::set<std::string> sync;
  const auto cb = trace_channels(b.tr);
  for (const auto& c : trace_channels(a.tr)) {
    if (cb.count(c)) sync.insert(c);
  }
  return merge_states(a, b, sync);
}

ProcState merge_states(const ProcState& a, const ProcState& b, const std::set<std::string>& sync) {
  if (a.now != b.now) throw MergeError("states are not parallelable: clocks differ");
  ProcState out;
  out.now = a.now;
  out.vals = a.vals;
  for (const auto& [k, v] : b.vals) {
    if (!out.vals.emplace(k, v).second) throw MergeError("states are not parallelable: both bind " + k);
  }
  auto merged = merge_traces(a.tr, b.tr, sync);
  if (merged.empty()) throw MergeError("traces do not merge");
  out.tr = merged.front();
  std::set<ReadyItem> rdy(a.rdy.begin(), a.rdy.end());
  rdy.insert(b.rdy.begin(), b.rdy.end());
  out.rdy.assign(rdy.begin(), rdy.end());
  return out;
}

}  // namespace shcsp
