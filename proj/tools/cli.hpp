#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace latfuse::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kMalformed = 2;
inline constexpr int kInfeasible = 3;

/// Runs one command line (without the program name). Results go to `out`;
/// failures print a single `error: <kind>: <message>` line to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace latfuse::cli
