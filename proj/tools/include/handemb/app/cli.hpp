#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace handemb::app {

enum ExitCode : int { kSuccess = 0, kDataError = 1, kUsageError = 2 };

/// Runs the command line `args` (without the program name). Output goes to
/// `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace handemb::app
