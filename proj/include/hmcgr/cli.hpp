#pragma once

#include <string>
#include <vector>

namespace hmcgr::cli {

// Exit codes: 0 success, 1 runtime failure, 2 usage/config error.
inline constexpr int kOk = 0;
inline constexpr int kRuntimeError = 1;
inline constexpr int kUsageError = 2;

int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

}  // namespace hmcgr::cli
