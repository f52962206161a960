#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace topiczero::cli {

/// Parses `args` (without the program name) and runs one subcommand.
/// Results go to `out`, diagnostics to `err`. Returns the exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace topiczero::cli
