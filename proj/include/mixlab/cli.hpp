#pragma once

#include <string>
#include <vector>

namespace mixlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

/// Parses and runs one subcommand. Exit 0 on success or pass, 1 when a check
/// fails, 2 on usage or configuration errors.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args);

}  // namespace mixlab::cli
