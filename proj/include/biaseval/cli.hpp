#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace biaseval::cli {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitComputation = 1;
inline constexpr int kExitUsage = 2;

/// Runs the tool with `args` (args[0] is the program name). Never throws;
/// failures are reported on `err` and through the return code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace biaseval::cli
