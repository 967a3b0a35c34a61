#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mcflow::cli {

enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_failure = 2 };

/// Parses `args` (without the program name) and runs the selected
/// subcommand. Reports go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mcflow::cli
