#pragma once

#include <string>
#include <vector>

namespace fdl {

// Runs one CLI invocation (argv without the program name). Exit codes:
// 0 success, 1 validation/config error, 2 I/O error, 3 internal check failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace fdl
