#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetgnn/cache_compare.hpp"
#include "hetgnn/config.hpp"
#include "hetgnn/device_sim.hpp"
#include "hetgnn/hotness.hpp"
#include "hetgnn/orchestrator.hpp"

namespace hetgnn {

// Bumped whenever a CSV layout changes. Every CSV starts with
//   # schema <name> v<version>
//   # manifest <file>
inline constexpr int kCsvSchemaVersion = 1;

std::string code_version();

struct RunManifest {
  std::string command;
  RunSpec spec;
  std::uint64_t seed = 0;
  std::string dataset;
  std::uint64_t dataset_fingerprint = 0;
  std::vector<std::string> outputs;  // file names relative to the manifest

  nlohmann::json to_json() const;
};

std::string csv_header(const std::string& schema, const std::string& manifest_file);

// Per-batch rows. Deterministic: no wall-clock columns.
std::string batches_csv(const RunReport& r, const std::string& manifest_file);
// Per-epoch rows including the accuracy curve.
std::string epochs_csv(const RunReport& r, const std::string& manifest_file);
// Everything else, wall-clock role times included.
nlohmann::json summary_json(const RunReport& r);

std::string trace_csv(const SimResult& r, const std::string& manifest_file);
std::string hotness_csv(const HotnessTable& t, const std::string& manifest_file);
std::string cache_sweep_csv(const std::vector<CacheSweepPoint>& pts, const std::string& manifest_file);

struct StrategySim {
  Strategy strategy = Strategy::kCase1;
  SimSummary pipelined;
  SimSummary serialized;
  TransferRecord transfer;
};
// Plans `cfg` under `strategy` and simulates it pipelined and serialized.
// `trace` receives the pipelined schedule when non-null.
StrategySim simulate_strategy(const Dataset& ds, TrainConfig cfg, Strategy strategy, SimResult* trace = nullptr);
std::string strategy_table_csv(const std::vector<StrategySim>& rows, const std::string& manifest_file);

// Writes `text` to dir/name, creating dir. Throws std::runtime_error.
void write_text(const std::filesystem::path& dir, const std::string& name, const std::string& text);

}  // namespace hetgnn
