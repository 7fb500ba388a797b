#include "hetgnn/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace hetgnn {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

// Non-negative integers only; get<unsigned> would wrap -1.
template <typename T>
void read_count(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  const auto& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(where + "." + key + ": expected a non-negative integer");
  }
  out = static_cast<T>(v.get<unsigned long long>());
}

json device_json(const DeviceModel& m) {
  return {{"compute_rate", m.compute_rate},
          {"sample_rate", m.sample_rate},
          {"gather_rate", m.gather_rate},
          {"memory_capacity", m.memory_capacity}};
}

void device_from(const json& j, DeviceModel& m, const std::string& where) {
  check_keys(j, {"compute_rate", "sample_rate", "gather_rate", "memory_capacity"}, where);
  read(j, "compute_rate", m.compute_rate, where);
  read(j, "sample_rate", m.sample_rate, where);
  read(j, "gather_rate", m.gather_rate, where);
  read_count(j, "memory_capacity", m.memory_capacity, where);
}

}  // namespace

DeviceSet device_preset(const std::string& name) {
  if (name == "calibrated") return calibrated_devices();
  throw ConfigError("unknown device preset '" + name + "' (expected calibrated)");
}

json to_json(const DeviceSet& d) {
  return {{"slow", device_json(d.slow)},
          {"fast", device_json(d.fast)},
          {"link", {{"bandwidth", d.link.bandwidth}, {"latency", d.link.latency}}},
          {"contention_weight", d.contention_weight}};
}

DeviceSet devices_from_json(const json& j, DeviceSet d) {
  check_keys(j, {"preset", "slow", "fast", "link", "contention_weight"}, "devices");
  if (j.contains("preset")) d = device_preset(j.at("preset").get<std::string>());
  if (j.contains("slow")) device_from(j.at("slow"), d.slow, "devices.slow");
  if (j.contains("fast")) device_from(j.at("fast"), d.fast, "devices.fast");
  if (j.contains("link")) {
    check_keys(j.at("link"), {"bandwidth", "latency"}, "devices.link");
    read(j.at("link"), "bandwidth", d.link.bandwidth, "devices.link");
    read(j.at("link"), "latency", d.link.latency, "devices.link");
  }
  read(j, "contention_weight", d.contention_weight, "devices");
  d.validate();
  return d;
}

json to_json(const TrainConfig& c) {
  return {{"model", to_string(c.model)},
          {"hidden_dim", c.hidden_dim},
          {"fanouts", c.fanouts},
          {"batch_size", c.batch_size},
          {"super_batch_n", c.super_batch_n},
          {"hot_ratio", c.hot_ratio},
          {"strategy", to_string(c.strategy)},
          {"optimizer", to_string(c.optimizer)},
          {"lr", c.lr},
          {"epochs", c.epochs},
          {"seed", c.seed},
          {"presample_rounds", c.presample_rounds},
          {"cache_budget_bytes", c.cache_budget_bytes},
          {"fallback_limit", c.fallback_limit},
          {"staging_capacity", to_string(c.staging_capacity)},
          {"planner_rounds", c.planner_rounds},
          {"pipelined", c.pipelined},
          {"evaluate", c.evaluate},
          {"prefetch_depth", c.prefetch_depth},
          {"devices", to_json(c.devices)}};
}

TrainConfig train_config_from_json(const json& j, TrainConfig c) {
  const std::string w = "train";
  check_keys(j,
             {"model", "hidden_dim", "fanouts", "batch_size", "super_batch_n", "hot_ratio", "strategy", "optimizer",
              "lr", "epochs", "seed", "presample_rounds", "cache_budget_bytes", "fallback_limit", "staging_capacity",
              "planner_rounds", "pipelined", "evaluate", "prefetch_depth", "devices"},
             w);
  if (j.contains("model")) c.model = parse_model_kind(j.at("model").get<std::string>());
  if (j.contains("strategy")) c.strategy = parse_strategy(j.at("strategy").get<std::string>());
  if (j.contains("optimizer")) c.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
  if (j.contains("staging_capacity")) {
    c.staging_capacity = parse_staging_capacity(j.at("staging_capacity").get<std::string>());
  }
  if (j.contains("fanouts")) {
    const auto& f = j.at("fanouts");
    if (!f.is_array()) throw ConfigError("train.fanouts: expected an array");
    c.fanouts.clear();
    for (const auto& x : f) {
      if (!x.is_number_integer() || x.get<long long>() < 1) throw ConfigError("train.fanouts: entries must be >= 1");
      c.fanouts.push_back(x.get<std::uint32_t>());
    }
  }
  read_count(j, "hidden_dim", c.hidden_dim, w);
  read_count(j, "batch_size", c.batch_size, w);
  read_count(j, "super_batch_n", c.super_batch_n, w);
  read(j, "hot_ratio", c.hot_ratio, w);
  read(j, "lr", c.lr, w);
  read_count(j, "epochs", c.epochs, w);
  read_count(j, "seed", c.seed, w);
  read_count(j, "presample_rounds", c.presample_rounds, w);
  read_count(j, "cache_budget_bytes", c.cache_budget_bytes, w);
  read(j, "fallback_limit", c.fallback_limit, w);
  read_count(j, "planner_rounds", c.planner_rounds, w);
  read(j, "pipelined", c.pipelined, w);
  read(j, "evaluate", c.evaluate, w);
  read_count(j, "prefetch_depth", c.prefetch_depth, w);
  if (j.contains("devices")) c.devices = devices_from_json(j.at("devices"), c.devices);
  c.validate();
  return c;
}

json to_json(const RunSpec& s) {
  json j = {{"dataset", s.dataset}, {"train", to_json(s.train)}};
  if (s.cache_budget_fraction) j["cache_budget_fraction"] = *s.cache_budget_fraction;
  if (!s.budget_fractions.empty()) j["budget_fractions"] = s.budget_fractions;
  return j;
}

RunSpec run_spec_from_json(const json& j) try {
  check_keys(j, {"dataset", "train", "cache_budget_fraction", "budget_fractions", "devices"}, "config");
  RunSpec s;
  read(j, "dataset", s.dataset, "config");
  if (j.contains("train")) s.train = train_config_from_json(j.at("train"), s.train);
  if (j.contains("devices")) s.train.devices = devices_from_json(j.at("devices"), s.train.devices);
  if (j.contains("cache_budget_fraction")) {
    double f = 0;
    read(j, "cache_budget_fraction", f, "config");
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("config.cache_budget_fraction must be in [0, 1]");
    s.cache_budget_fraction = f;
  }
  read(j, "budget_fractions", s.budget_fractions, "config");
  for (double f : s.budget_fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("config.budget_fractions entries must be in [0, 1]");
  }
  return s;
} catch (const json::exception& e) {
  throw ConfigError(std::string("config: ") + e.what());
}

RunSpec load_run_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  return run_spec_from_json(j);
}

TrainConfig RunSpec::resolved(const Dataset& ds) const {
  TrainConfig c = train;
  if (cache_budget_fraction) {
    c.cache_budget_bytes = static_cast<std::uint64_t>(
        std::floor(*cache_budget_fraction * static_cast<double>(ds.data.features.size() * kRealSize)));
  }
  return c;
}

}  // namespace hetgnn
