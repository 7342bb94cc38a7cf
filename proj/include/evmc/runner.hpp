#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "evmc/run_config.hpp"

namespace evmc {

struct RunOptions {
  std::optional<std::filesystem::path> output_dir;  // overrides config
  std::optional<uint64_t> seed;                     // overrides config
  int workers = 1;
};

/// Execute one run in the mode the config selects. Artifacts land in the
/// output directory; returns a process exit status.
int run(RunConfig config, const RunOptions& options, std::ostream& log);

/// Oracle-equivalence suite: free-fermion vs dense diagonalization, Lanczos
/// vs dense, Wick-determinant correlators, finite-difference susceptibility
/// convergence. Prints one PASS/FAIL line per check.
int run_verify(std::ostream& log, bool quick = false);

}  // namespace evmc
