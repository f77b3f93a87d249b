#pragma once

#include <iosfwd>

namespace distillnet::cli {

/// Parses the command line and runs one subcommand. Returns 0 on success,
/// 1 on usage or validation errors, 2 on runtime failures.
int run_app(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace distillnet::cli
