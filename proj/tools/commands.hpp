#pragma once

#include <ostream>

#include "run_config.hpp"

namespace choquard::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNotConverged = 2;
inline constexpr int kExitConfig = 3;

/// Runs the subcommand, writes its artifacts to cfg.output_dir and one
/// summary line per result to `out`. Returns the exit status.
int run(const RunConfig& cfg, std::ostream& out);

}  // namespace choquard::cli
