#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "actmeas/config.hpp"

namespace actmeas::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitTrialFailure = 1,
  kExitConfig = 2,
  kExitCheckpoint = 3,
  kExitData = 4,
};

// Moves every `--section.key=value` or `--section.key value` argument out of
// `args` and returns them in order.
std::vector<ConfigOverride> extract_overrides(std::vector<std::string>& args);

// Entry point shared by the executable and the tests; `args` excludes the
// program name.
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace actmeas::cli
