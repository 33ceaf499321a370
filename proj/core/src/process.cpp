#include "shcsp/process.hpp"

namespace shcsp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Process make(ProcessNode node) { return Process(std::make_shared<const ProcessNode>(std::move(node))); }

void collect_channels(const Process& p, std::set<std::string>* in, std::set<std::string>* out) {
  std::visit(overloaded{
                 [](const proc::Skip&) {},
                 [](const proc::Assign&) {},
                 [&](const proc::Input& n) {
                   if (in) in->insert(n.chan);
                 },
                 [&](const proc::Output& n) {
                   if (out) out->insert(n.chan);
                 },
                 [&](const proc::Seq& n) {
                   collect_channels(n.first, in, out);
                   collect_channels(n.second, in, out);
                 },
                 [&](const proc::Cond& n) { collect_channels(n.body, in, out); },
                 [&](const proc::Repeat& n) { collect_channels(n.body, in, out); },
                 [&](const proc::PChoice& n) {
                   collect_channels(n.left, in, out);
                   collect_channels(n.right, in, out);
                 },
                 [](const proc::Sde&) {},
                 [&](const proc::Interrupt& n) {
                   for (const auto& b : n.branches) {
                     if (b.event.direction == Direction::Input) {
                       if (in) in->insert(b.event.chan);
                     } else if (out) {
                       out->insert(b.event.chan);
                     }
                     collect_channels(b.body, in, out);
                   }
                 },
                 [&](const proc::Parallel& n) {
                   collect_channels(n.left, in, out);
                   collect_channels(n.right, in, out);
                 },
             },
             p.node().value);
}

void collect_block_vars(const SdeBlock& block, std::set<std::string>& out) {
  out.insert(block.vars.begin(), block.vars.end());
  for (const auto& e : block.drift) collect_variables(e, out);
  for (const auto& row : block.diffusion) {
    for (const auto& e : row) collect_variables(e, out);
  }
  collect_variables(block.domain, out);
}

void collect_vars(const Process& p, std::set<std::string>& out) {
  std::visit(overloaded{
                 [](const proc::Skip&) {},
                 [&](const proc::Assign& n) {
                   out.insert(n.var);
                   collect_variables(n.value, out);
                 },
                 [&](const proc::Input& n) { out.insert(n.var); },
                 [&](const proc::Output& n) { collect_variables(n.value, out); },
                 [&](const proc::Seq& n) {
                   collect_vars(n.first, out);
                   collect_vars(n.second, out);
                 },
                 [&](const proc::Cond& n) {
                   collect_variables(n.guard, out);
                   collect_vars(n.body, out);
                 },
                 [&](const proc::Repeat& n) { collect_vars(n.body, out); },
                 [&](const proc::PChoice& n) {
                   collect_vars(n.left, out);
                   collect_vars(n.right, out);
                 },
                 [&](const proc::Sde& n) { collect_block_vars(n.block, out); },
                 [&](const proc::Interrupt& n) {
                   collect_block_vars(n.block, out);
                   for (const auto& b : n.branches) {
                     if (b.event.direction == Direction::Input) {
                       out.insert(b.event.var);
                     } else {
                       collect_variables(b.event.value, out);
                     }
                     collect_vars(b.body, out);
                   }
                 },
                 [&](const proc::Parallel& n) {
                   collect_vars(n.left, out);
                   collect_vars(n.right, out);
                 },
             },
             p.node().value);
}

}  // namespace

bool operator==(const SdeBlock& a, const SdeBlock& b) {
  return a.vars == b.vars && a.drift == b.drift && a.diffusion == b.diffusion && a.domain == b.domain;
}

CommEvent CommEvent::input(std::string chan, std::string var) {
  return CommEvent{Direction::Input, std::move(chan), std::move(var), Expr()};
}

CommEvent CommEvent::output(std::string chan, Expr value) {
  return CommEvent{Direction::Output, std::move(chan), {}, std::move(value)};
}

bool operator==(const CommEvent& a, const CommEvent& b) {
  if (a.direction != b.direction || a.chan != b.chan) return false;
  return a.direction == Direction::Input ? a.var == b.var : a.value == b.value;
}

Process::Process() : Process(skip()) {}

Process Process::skip() { return make(ProcessNode{proc::Skip{}}); }
Process Process::assign(std::string var, Expr value) {
  return make(ProcessNode{proc::Assign{std::move(var), std::move(value)}});
}
Process Process::input(std::string chan, std::string var) {
  return make(ProcessNode{proc::Input{std::move(chan), std::move(var)}});
}
Process Process::output(std::string chan, Expr value) {
  return make(ProcessNode{proc::Output{std::move(chan), std::move(value)}});
}
Process Process::seq(Process first, Process second) {
  return make(ProcessNode{proc::Seq{std::move(first), std::move(second)}});
}
Process Process::cond(BoolExpr guard, Process body) {
  return make(ProcessNode{proc::Cond{std::move(guard), std::move(body)}});
}
Process Process::repeat(Process body) { return make(ProcessNode{proc::Repeat{std::move(body)}}); }
Process Process::pchoice(Process left, Rational prob, Process right) {
  return make(ProcessNode{proc::PChoice{std::move(left), std::move(prob), std::move(right)}});
}
Process Process::sde(SdeBlock block) { return make(ProcessNode{proc::Sde{std::move(block)}}); }
Process Process::interrupt(SdeBlock block, std::vector<Branch> branches) {
  return make(ProcessNode{proc::Interrupt{std::move(block), std::move(branches)}});
}
Process Process::parallel(Process left, Process right) {
  return make(ProcessNode{proc::Parallel{std::move(left), std::move(right)}});
}

bool operator==(const Process& a, const Process& b) {
  if (a.get() == b.get()) return true;
  const auto& x = a.node().value;
  const auto& y = b.node().value;
  if (x.index() != y.index()) return false;
  return std::visit(
      overloaded{
          [&](const proc::Skip&) { return true; },
          [&](const proc::Assign& n) {
            const auto& o = std::get<proc::Assign>(y);
            return n.var == o.var && n.value == o.value;
          },
          [&](const proc::Input& n) {
            const auto& o = std::get<proc::Input>(y);
            return n.chan == o.chan && n.var == o.var;
          },
          [&](const proc::Output& n) {
            const auto& o = std::get<proc::Output>(y);
            return n.chan == o.chan && n.value == o.value;
          },
          [&](const proc::Seq& n) {
            const auto& o = std::get<proc::Seq>(y);
            return n.first == o.first && n.second == o.second;
          },
          [&](const proc::Cond& n) {
            const auto& o = std::get<proc::Cond>(y);
            return n.guard == o.guard && n.body == o.body;
          },
          [&](const proc::Repeat& n) { return n.body == std::get<proc::Repeat>(y).body; },
          [&](const proc::PChoice& n) {
            const auto& o = std::get<proc::PChoice>(y);
            return n.prob == o.prob && n.left == o.left && n.right == o.right;
          },
          [&](const proc::Sde& n) { return n.block == std::get<proc::Sde>(y).block; },
          [&](const proc::Interrupt& n) {
            const auto& o = std::get<proc::Interrupt>(y);
            if (!(n.block == o.block) || n.branches.size() != o.branches.size()) return false;
            for (std::size_t i = 0; i < n.branches.size(); ++i) {
              const auto& l = n.branches[i];
              const auto& r = o.branches[i];
              if (l.weight != r.weight || !(l.event == r.event) || !(l.body == r.body)) return false;
            }
            return true;
          },
          [&](const proc::Parallel& n) {
            const auto& o = std::get<proc::Parallel>(y);
            return n.left == o.left && n.right == o.right;
          },
      },
      x);
}

std::set<std::string> channels(const Process& p) {
  std::set<std::string> all;
  collect_channels(p, &all, &all);
  return all;
}

std::set<std::string> input_channels(const Process& p) {
  std::set<std::string> in;
  collect_channels(p, &in, nullptr);
  return in;
}

std::set<std::string> output_channels(const Process& p) {
  std::set<std::string> out;
  collect_channels(p, nullptr, &out);
  return out;
}

std::set<std::string> variables(const Process& p) {
  std::set<std::string> out;
  collect_vars(p, out);
  return out;
}

bool is_parallel(const Process& p) { return std::holds_alternative<proc::Parallel>(p.node().value); }

std::vector<Process> parallel_components(const Process& p) {
  if (const auto* par = std::get_if<proc::Parallel>(&p.node().value)) {
    auto out = parallel_components(par->left);
    for (auto& q : parallel_components(par->right)) out.push_back(std::move(q));
    return out;
  }
  return {p};
}

}  // namespace shcsp
