#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace csm {

/// Exit statuses of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitIo = 2 };

/// Runs the `csm` command line. `args` excludes the program name. Report
/// output that has no --out goes to `out`; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace csm
