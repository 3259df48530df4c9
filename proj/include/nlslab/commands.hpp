#pragma once

#include <string>

#include "nlslab/config.hpp"

namespace nlslab {

/// Exit codes shared by the CLI: 0 success, 2 hypothesis failed,
/// 3 numerical failure, 4 config error.
enum ExitCode { kOk = 0, kHypothesisFailed = 2, kNumericalFailure = 3, kConfigError = 4 };

int cmd_defaults();
int cmd_ground_state(const RunConfig& cfg);
int cmd_spectrum(const RunConfig& cfg);
int cmd_fgr(const RunConfig& cfg, int jobs = 1);
int cmd_simulate(const RunConfig& cfg);
int cmd_track(const RunConfig& cfg);
int cmd_report(const RunConfig& cfg);

/// Full argv-level entry point used by the binary and by tests.
int run_cli(int argc, const char* const* argv);

}  // namespace nlslab
