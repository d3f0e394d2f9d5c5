#pragma once

#include <string>
#include <vector>

namespace pvgap::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitAllAreasFailed = 3;

/// Runs one command line; args[0] is the program name.
int run(const std::vector<std::string>& args);

} // namespace pvgap::cli
