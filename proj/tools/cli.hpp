#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace reclab::cli {

// Runs one subcommand. `args` excludes the program name. Returns 0 on success,
// 2 on invalid input, 3 when a computation budget is exceeded.
int dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr);

// "4,8,12", "4..20" or a mix such as "4..8,16".
std::vector<long long> parse_grid(const std::string& text);

}  // namespace reclab::cli
