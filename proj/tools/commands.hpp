#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace attnslam::cli {

/// Exit codes: 0 success, 1 usage error, 2 data/validation error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs the command line given without the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace attnslam::cli
