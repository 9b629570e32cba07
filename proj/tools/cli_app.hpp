#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pubbias::cli {

inline constexpr const char* kVersion = "1.0.0";

/// Exit codes: 0 success, 1 internal or numeric failure, 2 user or input error.
enum ExitCode : int { kOk = 0, kInternal = 1, kUserError = 2 };

/// Runs one command. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pubbias::cli
