#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "itest/config.hpp"

namespace itest {

// Parses arguments (without the program name). Throws UsageError. Returns
// an empty optional when help or version output was requested; that text
// is written to `out`.
std::optional<RunConfig> parse_args(const std::vector<std::string>& args, std::ostream& out);

// Runs the tool and returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace itest
