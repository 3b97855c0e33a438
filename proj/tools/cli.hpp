#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace wnucsp::cli {

enum ExitCode : int {
  kOk = 0,
  kUnsat = 1,
  kNone = 2,
  kUsage = 3,
  kInternal = 4,
};

// Runs one command line (without the program name) and returns the exit
// status.  Results go to `out`, diagnostics and traces to `err`.
int execute_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wnucsp::cli
