// hetgnn: train, simulate and compare orchestration strategies.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "hetgnn/cache_compare.hpp"
#include "hetgnn/config.hpp"
#include "hetgnn/datasets.hpp"
#include "hetgnn/report.hpp"

using namespace hetgnn;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kOom = 3, kStaleness = 4 };

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::optional<std::string> dataset;
  std::optional<std::string> strategy;
  std::optional<std::string> model;
  std::optional<std::string> optimizer;
  std::optional<double> hot_ratio;
  std::optional<long long> n;
  std::optional<long long> batch_size;
  std::optional<long long> epochs;
  std::optional<long long> hidden;
  std::optional<double> lr;
  std::optional<long long> presample_rounds;
  std::optional<double> cache_fraction;
  std::optional<std::string> staging;
  std::vector<long long> fanouts;
  bool pipelined = false;
  bool no_eval = false;
};

std::uint32_t count(long long v, const char* flag, long long min = 0) {
  if (v < min) throw ConfigError(std::string("--") + flag + " must be >= " + std::to_string(min));
  return static_cast<std::uint32_t>(v);
}

RunSpec build_spec(const Overrides& o) {
  RunSpec s = o.config.empty() ? RunSpec{} : load_run_spec(o.config);
  TrainConfig& c = s.train;
  if (o.dataset) s.dataset = *o.dataset;
  if (o.seed) c.seed = *o.seed;
  if (o.strategy) c.strategy = parse_strategy(*o.strategy);
  if (o.model) c.model = parse_model_kind(*o.model);
  if (o.optimizer) c.optimizer = parse_optimizer(*o.optimizer);
  if (o.staging) c.staging_capacity = parse_staging_capacity(*o.staging);
  if (o.hot_ratio) c.hot_ratio = *o.hot_ratio;
  if (o.n) c.super_batch_n = count(*o.n, "n", 1);
  if (o.batch_size) c.batch_size = count(*o.batch_size, "batch-size", 1);
  if (o.epochs) c.epochs = count(*o.epochs, "epochs", 1);
  if (o.hidden) c.hidden_dim = count(*o.hidden, "hidden", 1);
  if (o.lr) c.lr = *o.lr;
  if (o.presample_rounds) c.presample_rounds = count(*o.presample_rounds, "presample-rounds", 1);
  if (o.cache_fraction) {
    if (!(*o.cache_fraction >= 0 && *o.cache_fraction <= 1)) throw ConfigError("--cache-fraction must be in [0, 1]");
    s.cache_budget_fraction = *o.cache_fraction;
  }
  if (!o.fanouts.empty()) {
    c.fanouts.clear();
    for (auto f : o.fanouts) c.fanouts.push_back(count(f, "fanouts", 1));
  }
  if (o.pipelined) c.pipelined = true;
  if (o.no_eval) c.evaluate = false;
  c.validate();
  return s;
}

RunManifest manifest_for(const std::string& cmd, const RunSpec& s, const Dataset& ds) {
  RunManifest m;
  m.command = cmd;
  m.spec = s;
  m.seed = s.train.seed;
  m.dataset = ds.name;
  m.dataset_fingerprint = fingerprint(ds);
  return m;
}

const char* kManifest = "manifest.json";

void finish(const std::filesystem::path& dir, RunManifest& m) {
  write_text(dir, kManifest, m.to_json().dump(2) + "\n");
}

int cmd_train(const Overrides& o) {
  const RunSpec spec = build_spec(o);
  const Dataset ds = load_dataset(spec.dataset, 32, spec.train.seed);
  const TrainConfig cfg = spec.resolved(ds);
  const RunReport r = run_training(ds, cfg);
  auto m = manifest_for("train", spec, ds);
  const std::filesystem::path dir = o.out_dir;
  write_text(dir, "batches.csv", batches_csv(r, kManifest));
  write_text(dir, "epochs.csv", epochs_csv(r, kManifest));
  auto summary = summary_json(r);
  summary["manifest"] = kManifest;
  write_text(dir, "summary.json", summary.dump(2) + "\n");
  m.outputs = {"batches.csv", "epochs.csv", "summary.json"};
  finish(dir, m);
  for (const auto& e : r.epochs) {
    std::printf("epoch %u  loss %.4f  train %.4f  val %.4f  test %.4f  reuse %llu  fallback %llu\n", e.epoch,
                e.mean_loss, e.train_accuracy, e.val_accuracy, e.test_accuracy,
                static_cast<unsigned long long>(e.reuse_hits), static_cast<unsigned long long>(e.fallbacks));
  }
  std::printf("max version gap %llu (bound %llu)  simulated makespan %.4f s\n",
              static_cast<unsigned long long>(r.max_gap),
              static_cast<unsigned long long>(2 * cfg.super_batch_n - 1), r.sim.makespan);
  std::printf("wrote %s\n", dir.string().c_str());
  return kOk;
}

int cmd_simulate(const Overrides& o, bool all) {
  const RunSpec spec = build_spec(o);
  const Dataset ds = load_dataset(spec.dataset, 32, spec.train.seed);
  const TrainConfig base = spec.resolved(ds);
  const std::filesystem::path dir = o.out_dir;
  auto m = manifest_for("simulate", spec, ds);
  std::vector<StrategySim> rows;
  std::vector<Strategy> which;
  if (all) {
    which.assign(std::begin(kAllStrategies), std::end(kAllStrategies));
  } else {
    which.push_back(base.strategy);
  }
  for (Strategy s : which) {
    SimResult piped;
    rows.push_back(simulate_strategy(ds, base, s, &piped));
    const std::string name = "trace_" + to_string(s) + ".csv";
    write_text(dir, name, trace_csv(piped, kManifest));
    m.outputs.push_back(name);
  }
  write_text(dir, "strategies.csv", strategy_table_csv(rows, kManifest));
  m.outputs.push_back("strategies.csv");
  finish(dir, m);
  std::printf("%-12s %10s %10s %7s %7s %7s %12s\n", "strategy", "makespan", "serial", "slow", "fast", "link",
              "transfer_MB");
  for (const auto& r : rows) {
    std::printf("%-12s %10.4f %10.4f %7.2f %7.2f %7.2f %12.2f\n", to_string(r.strategy).c_str(),
                r.pipelined.makespan, r.serialized.makespan, r.pipelined.utilization[0], r.pipelined.utilization[1],
                r.pipelined.utilization[2], static_cast<double>(r.transfer.total_bytes()) / 1e6);
  }
  return kOk;
}

int cmd_hotness(const Overrides& o, std::optional<long long> rounds) {
  const RunSpec spec = build_spec(o);
  const Dataset ds = load_dataset(spec.dataset, 32, spec.train.seed);
  const auto& c = spec.train;
  const std::uint32_t r = rounds ? count(*rounds, "rounds", 1) : c.presample_rounds;
  const auto table = presample_hotness(ds, c, r);
  const std::filesystem::path dir = o.out_dir;
  write_text(dir, "hotness.csv", hotness_csv(table, kManifest));
  auto m = manifest_for("hotness", spec, ds);
  m.outputs = {"hotness.csv"};
  finish(dir, m);
  const auto top = select_hot(table, c.hot_ratio);
  std::printf("%zu vertices ranked over %u rounds; hot set (ratio %.2f) = %zu vertices\n", table.rank.size(), r,
              c.hot_ratio, top.size());
  for (std::size_t i = 0; i < std::min<std::size_t>(10, table.rank.size()); ++i) {
    std::printf("  #%zu vertex %u count %llu\n", i, table.rank[i],
                static_cast<unsigned long long>(table.counts[table.rank[i]]));
  }
  return kOk;
}

int cmd_compare_cache(const Overrides& o) {
  const RunSpec spec = build_spec(o);
  const Dataset ds = load_dataset(spec.dataset, 32, spec.train.seed);
  const auto fractions = spec.budget_fractions.empty() ? default_budget_fractions() : spec.budget_fractions;
  const auto pts = compare_cache(ds, spec.resolved(ds), fractions);
  const std::filesystem::path dir = o.out_dir;
  write_text(dir, "cache_sweep.csv", cache_sweep_csv(pts, kManifest));
  auto m = manifest_for("compare-cache", spec, ds);
  m.outputs = {"cache_sweep.csv"};
  finish(dir, m);
  std::printf("%8s %-10s %14s %12s %8s %6s %6s\n", "budget", "policy", "transfer_MB", "memory_MB", "hit", "cached",
              "cpu");
  for (const auto& p : pts) {
    std::printf("%7.1f%% %-10s %14.3f %12.3f %8.3f %6zu %6zu\n", 100 * p.budget_fraction,
                to_string(p.policy).c_str(), static_cast<double>(p.data_bytes) / 1e6,
                static_cast<double>(p.memory_bytes) / 1e6, p.hit_rate, p.cached_vertices, p.cpu_vertices);
  }
  return kOk;
}

int cmd_report(const Overrides& o) {
  const std::filesystem::path dir = o.out_dir;
  std::ifstream in(dir / "summary.json");
  if (!in) throw ConfigError("no summary.json in '" + dir.string() + "' (run train first)");
  const auto s = nlohmann::json::parse(in);
  std::ostringstream md;
  md << "# Run report\n\n";
  md << "dataset " << s.at("dataset").get<std::string>() << ", strategy "
     << s.at("config").at("strategy").get<std::string>() << ", seed " << s.at("config").at("seed") << "\n\n";
  md << "| epoch | loss | train | val | test | transfer MB | reuse | fallback |\n";
  md << "|---|---|---|---|---|---|---|---|\n";
  for (const auto& e : s.at("epochs")) {
    const auto& t = e.at("transfer");
    const double mb = (t.at("raw_feature_bytes").get<double>() + t.at("hot_embedding_bytes").get<double>() +
                       t.at("backward_aux_bytes").get<double>() + t.at("gradient_bytes").get<double>()) /
                      1e6;
    char line[256];
    std::snprintf(line, sizeof line, "| %d | %.4f | %.4f | %.4f | %.4f | %.2f | %llu | %llu |\n",
                  e.at("epoch").get<int>(), e.at("mean_loss").get<double>(), e.at("train_accuracy").get<double>(),
                  e.at("val_accuracy").get<double>(), e.at("test_accuracy").get<double>(), mb,
                  e.at("reuse_hits").get<unsigned long long>(), e.at("fallbacks").get<unsigned long long>());
    md << line;
  }
  char tail[160];
  std::snprintf(tail, sizeof tail, "\nmax version gap %llu (bound %llu), simulated makespan %.4f s\n",
                s.at("max_gap").get<unsigned long long>(), s.at("staleness_bound").get<unsigned long long>(),
                s.at("sim").at("makespan").get<double>());
  md << tail;
  write_text(dir, "report.md", md.str());
  std::cout << md.str();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hetgnn: heterogeneous mini-batch GNN training and cost simulation"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config, "JSON run config")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "Run seed");
  app.add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();

  auto workload = [&](CLI::App* sub) {
    sub->fallthrough();
    sub->add_option("--dataset", o.dataset, "Built-in name (sbm1k, pl1k, pl10k) or graph file");
    sub->add_option("--strategy", o.strategy, "case1|case2|case3|case4|layer-based");
    sub->add_option("--model", o.model, "gcn|sage");
    sub->add_option("--hot-ratio", o.hot_ratio, "Fraction of vertices treated as hot");
    sub->add_option("--n", o.n, "Batches per super-batch");
    sub->add_option("--batch-size", o.batch_size, "Seeds per batch");
    sub->add_option("--fanouts", o.fanouts, "Per-layer fanouts, bottom layer first")->expected(1, -1);
    sub->add_option("--hidden", o.hidden, "Hidden width");
    sub->add_option("--presample-rounds", o.presample_rounds, "Pre-sampling rounds for hotness");
    sub->add_option("--cache-fraction", o.cache_fraction, "Fast-device feature cache, share of the feature table");
  };
  auto* train = app.add_subcommand("train", "Train and write per-batch and per-epoch reports");
  workload(train);
  train->add_option("--epochs", o.epochs, "Epochs");
  train->add_option("--lr", o.lr, "Learning rate");
  train->add_option("--optimizer", o.optimizer, "sgd|adam");
  train->add_option("--staging", o.staging, "Stage-2 capacity: unbounded|model");
  train->add_flag("--pipelined", o.pipelined, "Run the threaded slow/fast pipeline");
  train->add_flag("--no-eval", o.no_eval, "Skip accuracy evaluation");

  auto* sim = app.add_subcommand("simulate", "Simulate strategy skeletons and export traces");
  workload(sim);
  sim->add_option("--epochs", o.epochs, "Epochs");
  bool sim_one = false;
  sim->add_flag("--only", sim_one, "Only the configured strategy instead of all five");

  auto* hot = app.add_subcommand("hotness", "Rank vertices by pre-sampled access frequency");
  workload(hot);
  std::optional<long long> rounds;
  hot->add_option("--rounds", rounds, "Pre-sampling rounds (default: presample_rounds)");

  auto* cache = app.add_subcommand("compare-cache", "Degree vs PreSample vs Hybrid over a budget sweep");
  workload(cache);
  cache->add_option("--epochs", o.epochs, "Epochs");

  auto* rep = app.add_subcommand("report", "Summarize a train output directory");
  rep->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*train) return cmd_train(o);
    if (*sim) return cmd_simulate(o, !sim_one);
    if (*hot) return cmd_hotness(o, rounds);
    if (*cache) return cmd_compare_cache(o);
    if (*rep) return cmd_report(o);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n%s", e.what(), app.help().c_str());
    return kConfig;
  } catch (const SimulatedOom& e) {
    std::fprintf(stderr, "simulated OOM: %s\n", e.what());
    return kOom;
  } catch (const StalenessViolation& e) {
    std::fprintf(stderr, "staleness contract violated: %s\n", e.what());
    return kStaleness;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
  return kFailure;
}
