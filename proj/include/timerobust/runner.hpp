#pragma once
// Executes a validated experiment configuration end to end: runs the
// Monte Carlo engine, assembles the CSV rows, and writes every output
// atomically (temp file + rename), so a failed run never leaves a partial
// file behind.
//
// Exit code contract:
//   0  success
//   2  invalid arguments / configuration (all problems are listed)
//   3  run finished but at least one replication produced a non-finite
//      loss (outputs are still written; the count is logged)
//   4  an output file could not be written

#include <ostream>
#include <stdexcept>
#include <string>

#include "timerobust/config.hpp"

namespace timerobust {

inline constexpr int kExitOk = 0;
inline constexpr int kExitBadArgs = 2;
inline constexpr int kExitNonfinite = 3;
inline constexpr int kExitIoError = 4;

// Thrown by the output writers; mapped to kExitIoError.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Runs the subcommand described by cfg.  Human-readable diagnostics go to
// `log` (the CLI passes stderr).  Returns the process exit code.
int run_command(const ExperimentConfig& cfg, std::ostream& log);

// Fast built-in sanity checks (the `selftest` subcommand).  Prints one
// line per check; returns the number of failed checks.
int run_selftest(std::ostream& log);

// Atomically writes `content` to `path`; throws IoError (leaving no
// partial file) on failure.
void atomic_write_file(const std::string& path, const std::string& content);

}  // namespace timerobust
