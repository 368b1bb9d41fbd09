#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace arground::cli {

/// Exit codes: 0 success, 1 usage error, 2 data error, 3 backend error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitBackend = 3;

/// Runs one `arground` invocation; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace arground::cli
