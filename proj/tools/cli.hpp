#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace covlab::cli {

// Process exit codes.
inline constexpr int kOk = 0;
inline constexpr int kInputError = 2;
inline constexpr int kIoError = 3;

/// Runs the command line `args` (args[0] is the program name) and returns
/// the exit code. Results go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace covlab::cli
