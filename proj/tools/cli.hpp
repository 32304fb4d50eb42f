#pragma once

#include <ostream>

namespace emview::cli {

/// Runs one command line against a workspace. Diagnostics go to `err` as
/// "error[Code]: message"; the return value is 0 iff none was emitted.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace emview::cli
