#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace paa {

// Exit codes of the `paa` driver.
enum ExitCode : int {
  kExitOk = 0,
  kExitInput = 1,     // unreadable file, parse error, SSA error
  kExitAnalysis = 2,  // analysis or runtime error
  kExitRejected = 3,  // certificate rejected, conformance violation, tolerance exceeded
  kExitUsage = 64,
};

// Runs the driver on `args` (without the program name). Data goes to `out`,
// diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace paa
