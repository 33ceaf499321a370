#pragma once

#include <string>
#include <vector>

#include "shcsp/process.hpp"

namespace shcsp {

struct Diagnostic {
  std::string severity;  // "error"
  std::string message;
};

/// Well-formedness problems; empty iff the process is valid.
std::vector<Diagnostic> validate(const Process& p);

/// True when some parallel composition sits below a sequential construct.
/// The executor only schedules a top-level parallel tree.
bool has_nested_parallel(const Process& p);

}  // namespace shcsp
