#pragma once

#include <iosfwd>

namespace preduce::cli {

enum ExitCode : int {
  exit_ok = 0,
  exit_config = 1,
  exit_oracle_setup = 2,
  exit_budget = 3,
  exit_internal = 4,
};

/// The `preduce` command line (subcommands `reduce` and `bench`).
int run_app(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace preduce::cli
