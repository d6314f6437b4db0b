#pragma once

#include <iosfwd>

namespace wsbm::cli {

/// Runs the command-line front end in-process. Returns the exit code:
/// 0 success, 1 input or validation error (one "error: ..." line on `err`),
/// 2 non-convergence under --strict.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wsbm::cli
