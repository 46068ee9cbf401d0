#pragma once

#include <iosfwd>

namespace mavg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

// Entry point shared by the executable and the integration tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mavg::cli
