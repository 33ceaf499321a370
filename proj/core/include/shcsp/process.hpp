#pragma once

#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "shcsp/expr.hpp"
#include "shcsp/rational.hpp"

namespace shcsp {

/// Continuous block `{d[s] = b dt + sigma dW & B}`.
struct SdeBlock {
  std::vector<std::string> vars;
  std::vector<Expr> drift;                  // one entry per variable
  std::vector<std::vector<Expr>> diffusion;  // vars.size() rows x brownian_dim() columns
  BoolExpr domain;

  std::size_t dim() const { return vars.size(); }
  std::size_t brownian_dim() const { return diffusion.empty() ? 0 : diffusion.front().size(); }
};

bool operator==(const SdeBlock& a, const SdeBlock& b);

enum class Direction { Input, Output };

struct CommEvent {
  Direction direction;
  std::string chan;
  std::string var;  // receiving variable (input)
  Expr value;       // sent value (output)

  static CommEvent input(std::string chan, std::string var);
  static CommEvent output(std::string chan, Expr value);
};

bool operator==(const CommEvent& a, const CommEvent& b);

struct ProcessNode;

/// Immutable SHCSP process term.
class Process {
 public:
  Process();  // skip
  explicit Process(std::shared_ptr<const ProcessNode> node) : node_(std::move(node)) {}

  static Process skip();
  static Process assign(std::string var, Expr value);
  static Process input(std::string chan, std::string var);
  static Process output(std::string chan, Expr value);
  static Process seq(Process first, Process second);
  static Process cond(BoolExpr guard, Process body);
  static Process repeat(Process body);
  static Process pchoice(Process left, Rational prob, Process right);
  static Process sde(SdeBlock block);
  struct Branch;
  static Process interrupt(SdeBlock block, std::vector<Branch> branches);
  static Process parallel(Process left, Process right);

  const ProcessNode& node() const { return *node_; }
  const ProcessNode* get() const { return node_.get(); }

 private:
  std::shared_ptr<const ProcessNode> node_;
};

struct Process::Branch {
  Rational weight;
  CommEvent event;
  Process body;
};

namespace proc {

struct Skip {};
struct Assign {
  std::string var;
  Expr value;
};
struct Input {
  std::string chan;
  std::string var;
};
struct Output {
  std::string chan;
  Expr value;
};
struct Seq {
  Process first;
  Process second;
};
struct Cond {
  BoolExpr guard;
  Process body;
};
struct Repeat {
  Process body;
};
struct PChoice {
  Process left;
  Rational prob;
  Process right;
};
struct Sde {
  SdeBlock block;
};
struct Interrupt {
  SdeBlock block;
  std::vector<Process::Branch> branches;
};
struct Parallel {
  Process left;
  Process right;
};

}  // namespace proc

struct ProcessNode {
  std::variant<proc::Skip, proc::Assign, proc::Input, proc::Output, proc::Seq, proc::Cond, proc::Repeat,
               proc::PChoice, proc::Sde, proc::Interrupt, proc::Parallel>
      value;
};

bool operator==(const Process& a, const Process& b);

/// Syntactic channel alphabet.
std::set<std::string> channels(const Process& p);

/// Channels the process reads from / writes to.
std::set<std::string> input_channels(const Process& p);
std::set<std::string> output_channels(const Process& p);

/// Process variables: assignment and input targets, SDE state variables and
/// every variable read by an expression.
std::set<std::string> variables(const Process& p);

/// Leaves of the top-level parallel tree, left to right.
std::vector<Process> parallel_components(const Process& p);

bool is_parallel(const Process& p);

}  // namespace shcsp
