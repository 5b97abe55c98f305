#pragma once

#include <iosfwd>

namespace qfb {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitRuntime = 1,
  kExitValidation = 2,
  kExitCampaign = 3,
  kExitViolation = 4,
};

/// Entry point for `qfb run|check|presets ...`; output goes to out/err.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qfb
