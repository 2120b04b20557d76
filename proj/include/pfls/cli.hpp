#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pfls::cli {

enum ExitCode : int { ok = 0, usage_error = 2, data_error = 3 };

/// Runs the command line `args` (without the program name). JSON/CSV payloads
/// go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pfls::cli
