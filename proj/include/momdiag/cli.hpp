#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace momdiag {

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitUsage = 2, kExitIo = 3, kExitDegenerate = 4 };

/// Runs one momdiag command line (args exclude the program name). Reports go
/// to `out`, diagnostics and usage text to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace momdiag
