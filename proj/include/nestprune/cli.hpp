#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nestprune {

// Exit statuses of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitBestNotPreserved = 2;

// Entry point of the `nestprune` tool; `args` excludes the program name.
// Tables go to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nestprune
