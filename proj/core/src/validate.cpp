#include "shcsp/validate.hpp"

#include <algorithm>

#include "shcsp/printer.hpp"

namespace shcsp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void error(std::vector<Diagnostic>& out, std::string message) { out.push_back({"error", std::move(message)}); }

void check_block(const SdeBlock& b, std::vector<Diagnostic>& out) {
  const std::size_t d = b.dim();
  if (d == 0) error(out, "malformed SDE block: no state variables");
  if (b.drift.size() != d) {
    error(out, "malformed SDE block: drift length " + std::to_string(b.drift.size()) + " for " + std::to_string(d) +
                   " variable(s)");
  }
  if (b.diffusion.size() != d) {
    error(out, "malformed SDE block: diffusion has " + std::to_string(b.diffusion.size()) + " row(s) for " +
                   std::to_string(d) + " variable(s)");
  }
  if (b.brownian_dim() == 0) error(out, "malformed SDE block: brownian dimension must be at least 1");
  for (const auto& row : b.diffusion) {
    if (row.size() != b.brownian_dim()) {
      error(out, "malformed SDE block: ragged diffusion matrix");
      break;
    }
  }
  std::vector<std::string> sorted = b.vars;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] == sorted[i - 1] && (i < 2 || sorted[i - 2] != sorted[i])) {
      error(out, "duplicate SDE variable " + sorted[i]);
    }
  }
}

template <class F>
void for_common(const std::set<std::string>& a, const std::set<std::string>& b, F f) {
  for (const auto& x : a) {
    if (b.count(x)) f(x);
  }
}

void check(const Process& p, std::vector<Diagnostic>& out) {
  std::visit(overloaded{
                 [&](const proc::Seq& n) {
                   check(n.first, out);
                   check(n.second, out);
                 },
                 [&](const proc::Cond& n) { check(n.body, out); },
                 [&](const proc::Repeat& n) { check(n.body, out); },
                 [&](const proc::PChoice& n) {
                   if (n.prob < 0 || n.prob > 1) {
                     error(out, "probability out of range: " + rational_literal(n.prob));
                   }
                   check(n.left, out);
                   check(n.right, out);
                 },
                 [&](const proc::Sde& n) { check_block(n.block, out); },
                 [&](const proc::Interrupt& n) {
                   check_block(n.block, out);
                   if (n.branches.empty()) error(out, "interrupt has no branches");
                   for (const auto& b : n.branches) {
                     if (b.weight <= 0) {
                       error(out, "interrupt weight must be positive: " + rational_literal(b.weight));
                     }
                     check(b.body, out);
                   }
                 },
                 [&](const proc::Parallel& n) {
                   check(n.left, out);
                   check(n.right, out);
                   for_common(variables(n.left), variables(n.right),
                              [&](const std::string& x) { error(out, "shared variable " + x); });
                   for_common(input_channels(n.left), input_channels(n.right),
                              [&](const std::string& c) { error(out, "channel " + c + " has two readers"); });
                   for_common(output_channels(n.left), output_channels(n.right),
                              [&](const std::string& c) { error(out, "channel " + c + " has two writers"); });
                 },
                 [](const auto&) {},
             },
             p.node().value);
}

bool contains_parallel(const Process& p) {
  return std::visit(overloaded{
                        [](const proc::Parallel&) { return true; },
                        [](const proc::Seq& n) { return contains_parallel(n.first) || contains_parallel(n.second); },
                        [](const proc::Cond& n) { return contains_parallel(n.body); },
                        [](const proc::Repeat& n) { return contains_parallel(n.body); },
                        [](const proc::PChoice& n) { return contains_parallel(n.left) || contains_parallel(n.right); },
                        [](const proc::Interrupt& n) {
                          return std::any_of(n.branches.begin(), n.branches.end(),
                                             [](const auto& b) { return contains_parallel(b.body); });
                        },
                        [](const auto&) { return false; },
                    },
                    p.node().value);
}

}  // namespace

std::vector<Diagnostic> validate(const Process& p) {
  std::vector<Diagnostic> out;
  check(p, out);
  return out;
}

bool has_nested_parallel(const Process& p) {
  for (const auto& leaf : parallel_components(p)) {
    if (contains_parallel(leaf)) return true;
  }
  return false;
}

}  // namespace shcsp
