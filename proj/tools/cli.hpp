#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace arl::cli {

// Runs the command line in-process. args excludes the program name.
// Returns the process exit code: 0 success, 1 validation or I/O error,
// 2 numeric failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace arl::cli
