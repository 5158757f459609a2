#pragma once

#include <iosfwd>

namespace editdyn {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitPartial = 2, kExitFailure = 3 };

// Subcommands ingest, analyze, fit, simulate and report.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace editdyn
