// Copyright 2026 The fdfm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fdfm/predictor.hpp"
#include "fdfm/sampler.hpp"
#include "fdfm/trainer.hpp"

// Run configuration files: one `key = value` pair per line, `#` starts a
// comment, blank lines are ignored. Unknown or repeated keys are errors.

namespace fdfm {

struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

/// Splits text into entries. Throws ConfigError "<origin>:<line>: ..." on a
/// line that is not a pair, comment or blank.
std::vector<ConfigEntry> parse_config_entries(std::string_view text, const std::string& origin);

struct RunConfig {
  TrainConfig train;
  SampleConfig sampling;  // schedule is filled from the train keys
  std::size_t sample_count = 16;
  Label condition;
  std::size_t curve_points = 101;
  SweepOptions sweep;
};

/// All recognized keys.
const std::vector<std::string>& known_config_keys();

RunConfig parse_run_config(std::string_view text, const std::string& origin = "<config>");
/// Throws IoError naming the path if it cannot be read.
RunConfig load_run_config(const std::filesystem::path& path);

/// key = value echo of the sampling settings.
std::vector<std::pair<std::string, std::string>> sample_echo(const RunConfig& config);

}  // namespace fdfm
