// Command implementations behind the rcp executable. Each command takes a
// parsed configuration, writes its report to the stream, and returns the
// process exit code (0 ok, 1 validation error, 2 numeric error, 3
// verification failure).
#pragma once

#include "rcp/config.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace rcp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumeric = 2;
inline constexpr int kExitVerification = 3;

// Prints the robustly optimal contract and its guarantee.
int cmd_solve(const RunConfig& config, std::ostream& out);

// Prints the buyer's best response to the configured mechanism at theta.
int cmd_respond(const RunConfig& config, const std::vector<double>& theta, std::ostream& out);

// Worst-case report for the configured mechanism, one row per resolution
// level with refinement deltas.
int cmd_worst_case(const RunConfig& config, std::ostream& out);

// Worst-case guarantees for every configured mechanism at the finest
// resolution, ordered by guarantee descending.
int cmd_compare(const RunConfig& config, std::ostream& out);

// Re-solves the scenario across values of "lambda" or "c".
int cmd_sweep(const RunConfig& config, const std::string& parameter,
              const std::vector<double>& values, std::ostream& out);

// Runs the invariant suite; prints one pass/fail line per check.
int cmd_verify(const RunConfig& config, std::ostream& out);

} // namespace rcp
