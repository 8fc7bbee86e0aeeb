#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace spchar::cli {

// Exit codes: 0 success, 1 at least one item failed, 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spchar::cli
