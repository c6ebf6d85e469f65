#pragma once

#include <iosfwd>

namespace drdqn {

/// Entry point behind the `drdqn` executable. Subcommands: train, eval,
/// gradcheck, oracle, plot. Returns 0 on success, 1 on runtime failure and 2
/// on a usage error (after printing usage text).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace drdqn
