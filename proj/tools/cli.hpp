#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace modlab::cli {

// Exit codes: 0 success, 1 invalid input, 2 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace modlab::cli
