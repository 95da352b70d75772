#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sheetrefine::cli {

// Entry point shared by the executable and the tests. args excludes argv[0].
// Returns the process exit code: 0 success, 1 user/input error, 2 internal.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sheetrefine::cli
