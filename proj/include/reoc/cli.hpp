#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace reoc {

/// Exit statuses of the reoc command.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitInput = 2,
  kExitBudget = 3,
  kExitMismatch = 4,
  kExitRuntime = 5,
};

/// Runs one reoc invocation; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

inline constexpr const char* kStatsHeader =
    "connector,k,strategy,units,m1,m2,max_states,max_transitions,total_states,"
    "total_transitions,compile_ms,budget,outcome";

}  // namespace reoc
