#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ctgp {

/// Exit codes of the command-line driver.
enum ExitCode : int { kExitOk = 0, kExitInvalid = 1, kExitSolver = 2 };

/// Runs one subcommand (`simulate`, `estimate`, `bias-demo`, `evaluate`,
/// `compare`). `args` excludes the program name. Failures print a single line
/// starting with "error: " to `err` and return a nonzero exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ctgp
