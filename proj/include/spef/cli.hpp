#ifndef SPEF_CLI_HPP
#define SPEF_CLI_HPP

#include <ostream>

namespace spef::cli {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitEstimation = 2;

inline constexpr const char* kToolVersion = "1.0.0";

/// Entry point of the `spef` tool. Writes diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace spef::cli

#endif
