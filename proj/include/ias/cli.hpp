#pragma once

#include <iosfwd>

namespace ias {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs one `ias` subcommand. Returns 0 on success, 1 on usage errors and 2 on data or
/// invariant errors. Every subcommand prints its resolved config as one JSON line first.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ias
