#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bfmle::cli {

// Exit codes: 0 success, 1 input or validation error, 2 internal assertion.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

} // namespace bfmle::cli
