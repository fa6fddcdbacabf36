#pragma once

#include <iosfwd>

namespace stacklab {

// Runs the command-line interface. Returns 0 on success or a passing verdict,
// 2 on a failing verdict and 1 on any error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stacklab
