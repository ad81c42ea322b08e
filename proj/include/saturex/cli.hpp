#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace saturex {

// Exit codes: 0 pass, 1 verification failure, 2 usage or config error.
int run_cli(int argc, const char* const* argv);
// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace saturex
