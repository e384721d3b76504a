#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace tunnel::cli {

/// Exit codes: 0 success, 1 configuration error, 2 numerical failure,
/// 3 cache corruption.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace tunnel::cli
