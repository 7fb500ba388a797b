#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetgnn/orchestrator.hpp"

namespace hetgnn {

// A run as described by a JSON config file. Unknown keys are rejected.
//
//   {
//     "dataset": "pl10k",
//     "train": { "strategy": "layer-based", "batch_size": 256, ... },
//     "cache_budget_fraction": 0.1,
//     "budget_fractions": [0, 0.01, 0.02, 0.05, 0.1, 0.2],
//     "devices": { "preset": "calibrated", "fast": { "compute_rate": 2e11 } }
//   }
struct RunSpec {
  std::string dataset = "sbm1k";
  TrainConfig train;
  // When set, overrides train.cache_budget_bytes as a share of the dataset's
  // feature table.
  std::optional<double> cache_budget_fraction;
  std::vector<double> budget_fractions;  // compare-cache sweep

  // Resolves cache_budget_fraction against `ds`.
  TrainConfig resolved(const Dataset& ds) const;
};

nlohmann::json to_json(const DeviceSet& d);
nlohmann::json to_json(const TrainConfig& c);
nlohmann::json to_json(const RunSpec& s);

// Missing keys keep the values of `base`.
DeviceSet devices_from_json(const nlohmann::json& j, DeviceSet base = calibrated_devices());
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});
RunSpec run_spec_from_json(const nlohmann::json& j);

// Throws ConfigError on unreadable files, malformed JSON or bad values.
RunSpec load_run_spec(const std::filesystem::path& path);

// Named device presets: "calibrated".
DeviceSet device_preset(const std::string& name);

}  // namespace hetgnn
