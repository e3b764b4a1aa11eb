#pragma once

#include <string>
#include <vector>

namespace mobelcov::cli {

/// Runs one subcommand (train, sweep, evaluate, metrics, rollout). `args`
/// excludes the program name. Returns the process exit status; failures print a
/// one-line diagnostic on stderr.
int run_command(const std::vector<std::string>& args);

}  // namespace mobelcov::cli
