// SPDX-License-Identifier: Apache-2.0
//
// Scenario files: ground-truth targets, channel parameters and seeds as
// JSON. The SI channel is not stored; it is regenerated from the seed.
#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "fdisac/channels.hpp"
#include "fdisac/experiment_config.hpp"

namespace fdisac {

struct ScenarioFile {
  Scenario scenario;
  std::uint64_t run_seed = 0;  // drives symbols and noise when replayed
  std::optional<ExperimentConfig> config;
};

std::string scenario_to_json(const ScenarioFile& file);

/// Parses targets and parameters and rebuilds the SI channel for `array`
/// (or the embedded config's array when present).
ScenarioFile scenario_from_json(const std::string& text,
                                const std::optional<ArrayConfig>& array = std::nullopt);

void save_scenario(const std::string& path, const ScenarioFile& file);
ScenarioFile load_scenario(const std::string& path,
                           const std::optional<ArrayConfig>& array = std::nullopt);

}  // namespace fdisac
