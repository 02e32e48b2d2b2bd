#pragma once

namespace nsesplit {

inline constexpr const char* kVersion = "0.1.0";

/// Command-line entry point. Exit codes: 0 success, 1 failure,
/// 2 assumption warnings under --strict.
int run_cli(int argc, const char* const* argv);

} // namespace nsesplit
