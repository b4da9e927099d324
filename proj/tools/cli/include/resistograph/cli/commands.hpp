#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "resistograph/cli/config.hpp"

namespace resistograph::cli {

/// Process exit status per failure class.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitParse = 2,
  kExitData = 3,
  kExitSolver = 4,
  kExitNumeric = 5,
};

/// Executes one mode and writes its artifacts under cfg.output_dir:
/// resolved.ini, manifest.json, metrics.json plus mode-specific CSVs.
/// Throws resistograph::Error subclasses.
void run(const RunConfig& cfg, std::ostream& out);

/// Full command line: `resistograph <subcommand> [--config F] [--seed S]
/// [--threads T] [--out DIR]`. Never throws; returns an ExitCode.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace resistograph::cli
