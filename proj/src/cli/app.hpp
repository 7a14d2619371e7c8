#pragma once

#include <iosfwd>

namespace codeguard::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Entry point of the command-line tool. Normal output goes to `out`,
// diagnostics to `err`.
int run_app(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace codeguard::cli
