#pragma once

#include <string>
#include <vector>

namespace persim {

/// Runs the command-line surface: `<subcommand> --config <path> [--seed N]
/// [--jobs N] [--out DIR] [--svg]`. Returns the process exit code:
/// 0 success, 2 config/model-invariant failure, 3 numerical blow-up.
int run_cli(const std::vector<std::string>& args);

}  // namespace persim
