#pragma once

#include <iosfwd>

namespace unrectify {

/// Command-line entry point: subcommands build, lower, eval, census,
/// stability and experiment {partition,gain}. Results go to -o files or
/// `out`; diagnostics to `err`. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace unrectify
