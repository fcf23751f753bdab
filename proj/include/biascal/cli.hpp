#pragma once

namespace biascal {

// Stable process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitRuntime = 1,  // runtime failure or at least one error cell in the report
  kExitUsage = 2,    // bad command line
  kExitConfig = 3,   // unreadable or invalid config / dataset / word list
};

// Entry point of the `biascal` tool: subcommands eval, bias-scan,
// sensitivity, and cache {stats, clear}.
int run_cli(int argc, char** argv);

}  // namespace biascal
