#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace imlab::cli {

/// Exit codes: 0 success, 1 numerical failure, 2 bad arguments, invalid
/// parameters or unwritable/unreadable files.
int run(int argc, const char* const* argv);

/// Same, with the program name omitted from `args` and explicit streams.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace imlab::cli
