#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "actmeas/harness.hpp"

namespace actmeas {

// Dotted-key override, e.g. {"wrapper.cost", "0.3"}.
using ConfigOverride = std::pair<std::string, std::string>;

// Parses the sectioned key = value run configuration:
//
//   [env]
//   name = cartpole
//   [wrapper]
//   cost = 0.3
//
// Overrides are applied after the file, last writer wins. Errors are
// ConfigError messages carrying the source line or override key.
RunConfig parse_run_config(std::string_view text, const std::vector<ConfigOverride>& overrides = {},
                           std::string_view source = "config");
RunConfig load_run_config(const std::string& path, const std::vector<ConfigOverride>& overrides = {});

// Complete echo of every key; parse_run_config(format_run_config(c)) == c.
std::string format_run_config(const RunConfig& config);

std::vector<std::string> config_keys();

// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace actmeas
