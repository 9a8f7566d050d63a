#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace leafpipe::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,    ///< unknown subcommand/flag, conflicting or invalid options
  kData = 2,     ///< missing or malformed input files
  kNumeric = 3,  ///< non-finite values aborted the run
};

/// Parses argv (argv[0] is the program name) and runs one subcommand.
/// Results go to `out`; the resolved configuration, seed and progress go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace leafpipe::cli
