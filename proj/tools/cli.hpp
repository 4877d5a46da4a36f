#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace idss::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 2,  // bad flags or configuration
  kDataError = 3,   // unreadable, malformed or mismatched input data
};

// Entry point behind the `idss` binary. Subcommands: train, predict,
// evaluate, rules, explain, ndwi.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Convenience for tests: args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace idss::cli
