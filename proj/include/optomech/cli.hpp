#pragma once

namespace optomech {

inline constexpr const char* toolkit_version = "1.0.0";

// Full command-line entry point. Returns the process exit code:
//   0  success
//   2  invalid flags, config, or input data
//   3  a fit ran but failed (no peak, no convergence, degenerate data)
// Every successful command prints a one-line JSON run report to stderr.
int run_command(int argc, const char* const argv[]);

}  // namespace optomech
