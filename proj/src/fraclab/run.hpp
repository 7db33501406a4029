#pragma once

#include <string>

namespace fraclab {

/// Executes one subcommand against a config file and writes its artifacts.
///
/// Subcommands: forward, reduce-check, carleman-check, invert,
/// stability-experiment.  Returns the process exit status: 0 on success, 1 on
/// a validation failure (bad config, violated precondition — nothing is
/// written), 2 on a numerical failure (solver breakdown, non-finite values,
/// a failed check).  All artifacts are accumulated in memory and written
/// only after the run has otherwise succeeded, so a validation failure never
/// leaves partial output behind.
///
/// The output directory comes from output.directory, overridden by the
/// FRACLAB_OUT environment variable; a manifest (config hash, versions,
/// wall time) accompanies every set of artifacts.
int run(const std::string& subcommand, const std::string& config_path);

}  // namespace fraclab
