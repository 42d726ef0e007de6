#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace kfield::cli {

// Exit codes: 0 pass, 1 check failed, 2 usage or input error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kfield::cli
