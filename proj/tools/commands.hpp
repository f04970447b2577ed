#pragma once

namespace spectral_ood::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitConfig = 2;

// Parses argv and dispatches to a subcommand. Never throws.
int run_cli(int argc, const char* const* argv);

}  // namespace spectral_ood::cli
