#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hprobit {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes of the command line tool.
enum ExitCode : int {
  exit_ok = 0,
  exit_internal = 1,
  exit_config = 2,
  exit_data = 3,
  exit_sampler = 4,
  exit_io = 5,
};

// Entry point of the `hprobit` tool; args excludes the program name.
// Subcommands: fit, predict, analyze, simulate, diagnose. Each writes into
// <output>/<subcommand>/ atomically, together with a manifest.json.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hprobit
