#pragma once

#include <iosfwd>

namespace elfuse {

/// Exit codes: 0 success, 1 computational failure (JSON error on `out`),
/// 2 usage error (message on `err`).
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace elfuse
