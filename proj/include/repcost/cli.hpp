#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace repcost {

/// Command-line entry point (args exclude the program name).
/// Returns 0 on success, 1 on domain errors, 2 on usage errors.
/// Every subcommand echoes its result as one line of JSON on `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace repcost
