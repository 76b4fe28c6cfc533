#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace behavtrace::cli {

enum ExitCode : int { kOk = 0, kIoOrConfig = 1, kDataError = 2 };

/// Parses argv (argv[0] is the program name), runs the subcommand, and
/// returns the process exit code. Diagnostics go to `err`, summaries to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace behavtrace::cli
