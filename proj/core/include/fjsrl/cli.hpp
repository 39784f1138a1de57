#pragma once

#include <string>
#include <vector>

namespace fjsrl {

// Dispatches the fjsrl subcommands (gen, train, eval, solve, validate,
// gantt). Exit codes: 0 success, 1 domain error, 2 usage error.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);  // args without argv[0]

}  // namespace fjsrl
