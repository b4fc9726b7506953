#pragma once

#include <iosfwd>

namespace aiart {

/// Exit codes of the command-line driver.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitTraining = 3 };

/// Runs one command line (argv[0] is the program name). Results go to `out`,
/// diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aiart
