#include "hetgnn/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace hetgnn {

using nlohmann::json;

#ifndef HETGNN_VERSION
#define HETGNN_VERSION "dev"
#endif

std::string code_version() { return HETGNN_VERSION; }

namespace {

// Round-trippable doubles.
std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json sim_json(const SimSummary& s) {
  return {{"makespan", s.makespan},
          {"critical_path", s.critical_path},
          {"utilization", {{"slow", s.utilization[0]}, {"fast", s.utilization[1]}, {"link", s.utilization[2]}}},
          {"memory_high_water",
           {{"slow", s.memory_high_water[0]}, {"fast", s.memory_high_water[1]}, {"link", s.memory_high_water[2]}}}};
}

json transfer_json(const TransferRecord& t) {
  return {{"raw_feature_bytes", t.raw_feature_reals * kRealSize},
          {"hot_embedding_bytes", t.hot_embedding_reals * kRealSize},
          {"backward_aux_bytes", t.backward_aux_reals * kRealSize},
          {"gradient_bytes", t.gradient_reals * kRealSize},
          {"raw_rows", t.raw_rows},
          {"cached_rows", t.cached_rows},
          {"reused_rows", t.reused_rows}};
}

}  // namespace

json RunManifest::to_json() const {
  return {{"command", command},
          {"code_version", code_version()},
          {"seed", seed},
          {"dataset", dataset},
          {"dataset_fingerprint", dataset_fingerprint},
          {"config", hetgnn::to_json(spec)},
          {"outputs", outputs},
          {"csv_schema_version", kCsvSchemaVersion}};
}

std::string csv_header(const std::string& schema, const std::string& manifest_file) {
  return "# schema " + schema + " v" + std::to_string(kCsvSchemaVersion) + "\n# manifest " + manifest_file + "\n";
}

std::string batches_csv(const RunReport& r, const std::string& manifest_file) {
  std::ostringstream o;
  o << csv_header("batches", manifest_file);
  o << "batch,epoch,super_batch,num_seeds,loss,correct,hot_rows,reused_rows,fallback_rows,raw_feature_bytes,"
       "hot_embedding_bytes,backward_aux_bytes,gradient_bytes,max_weight_change,max_gap\n";
  for (const auto& b : r.batches) {
    const auto& t = b.transfer;
    o << b.batch << ',' << b.epoch << ',' << b.super_batch << ',' << b.num_seeds << ',' << num(b.loss) << ','
      << b.correct << ',' << b.hot_rows << ',' << b.reused_rows << ',' << b.fallback_rows << ','
      << t.raw_feature_reals * kRealSize << ',' << t.hot_embedding_reals * kRealSize << ','
      << t.backward_aux_reals * kRealSize << ',' << t.gradient_reals * kRealSize << ',' << num(b.max_weight_change)
      << ',' << b.max_gap << '\n';
  }
  return o.str();
}

std::string epochs_csv(const RunReport& r, const std::string& manifest_file) {
  std::ostringstream o;
  o << csv_header("epochs", manifest_file);
  o << "epoch,mean_loss,train_accuracy,val_accuracy,test_accuracy,transfer_bytes,reuse_hits,fallbacks,cache_hits,"
       "sim_makespan\n";
  for (const auto& e : r.epochs) {
    o << e.epoch << ',' << num(e.mean_loss) << ',' << num(e.train_accuracy) << ',' << num(e.val_accuracy) << ','
      << num(e.test_accuracy) << ',' << e.transfer.total_bytes() << ',' << e.reuse_hits << ',' << e.fallbacks << ','
      << e.cache_hits << ',' << num(e.sim.makespan) << '\n';
  }
  return o.str();
}

json summary_json(const RunReport& r) {
  json epochs = json::array();
  TransferRecord total;
  for (const auto& e : r.epochs) {
    total += e.transfer;
    epochs.push_back({{"epoch", e.epoch},
                      {"mean_loss", e.mean_loss},
                      {"train_accuracy", e.train_accuracy},
                      {"val_accuracy", e.val_accuracy},
                      {"test_accuracy", e.test_accuracy},
                      {"transfer", transfer_json(e.transfer)},
                      {"reuse_hits", e.reuse_hits},
                      {"fallbacks", e.fallbacks},
                      {"cache_hits", e.cache_hits},
                      {"wall_train_seconds", e.wall_train},
                      {"sim", sim_json(e.sim)}});
  }
  json staging = json::array();
  for (const auto& s : r.staging) {
    staging.push_back({{"target_super_batch", s.target_super_batch},
                       {"staged", s.queue.size()},
                       {"demand", s.demand},
                       {"budget_seconds", s.budget_seconds}});
  }
  return {{"dataset", r.dataset},
          {"dataset_fingerprint", r.fingerprint},
          {"config", to_json(r.config)},
          {"partition",
           {{"cpu_compute", r.partition.cpu_compute.size()},
            {"gpu_cache", r.partition.gpu_cache.size()},
            {"cache_rows", r.cache_rows},
            {"embedding_bytes", r.partition.embedding_bytes}}},
          {"epochs", epochs},
          {"transfer", transfer_json(total)},
          {"epsilon", r.epsilon},
          {"staging", staging},
          {"max_gap", r.max_gap},
          {"staleness_bound", r.config.strategy == Strategy::kLayerBased ? 2 * r.config.super_batch_n - 1 : 0},
          {"staged_vertices", r.staged_vertices},
          {"sim", sim_json(r.sim)},
          {"wall_seconds", {{"sample", r.wall_sample}, {"stage2", r.wall_stage2}, {"train", r.wall_train}}}};
}

std::string trace_csv(const SimResult& r, const std::string& manifest_file) {
  std::ostringstream o;
  o << csv_header("trace", manifest_file);
  o << "start,end,role,stage,batch,super_batch,bytes_moved,ops_done\n";
  for (const auto& e : r.events) {
    o << num(e.start) << ',' << num(e.end) << ',' << e.role << ',' << e.stage << ',' << e.batch << ','
      << e.super_batch << ',' << num(e.bytes_moved) << ',' << num(e.ops_done) << '\n';
  }
  return o.str();
}

std::string hotness_csv(const HotnessTable& t, const std::string& manifest_file) {
  std::ostringstream o;
  o << csv_header("hotness", manifest_file);
  o << "rank,vertex,count\n";
  for (std::size_t i = 0; i < t.rank.size(); ++i) {
    o << i << ',' << t.rank[i] << ',' << t.counts[t.rank[i]] << '\n';
  }
  return o.str();
}

std::string cache_sweep_csv(const std::vector<CacheSweepPoint>& pts, const std::string& manifest_file) {
  std::ostringstream o;
  o << csv_header("cache_sweep", manifest_file);
  o << "budget_fraction,budget_bytes,policy,data_bytes,gradient_bytes,memory_bytes,cached_vertices,cpu_vertices,"
       "hit_rate,reused_rows\n";
  for (const auto& p : pts) {
    o << num(p.budget_fraction) << ',' << p.budget_bytes << ',' << to_string(p.policy) << ',' << p.data_bytes << ','
      << p.gradient_bytes << ',' << p.memory_bytes << ',' << p.cached_vertices << ',' << p.cpu_vertices << ','
      << num(p.hit_rate) << ',' << p.transfer.reused_rows << '\n';
  }
  return o.str();
}

std::string strategy_table_csv(const std::vector<StrategySim>& rows, const std::string& manifest_file) {
  std::ostringstream o;
  o << csv_header("strategies", manifest_file);
  o << "strategy,makespan,serialized_makespan,slow_util,fast_util,link_util,fast_memory_high_water,transfer_bytes\n";
  for (const auto& r : rows) {
    o << to_string(r.strategy) << ',' << num(r.pipelined.makespan) << ',' << num(r.serialized.makespan) << ','
      << num(r.pipelined.utilization[0]) << ',' << num(r.pipelined.utilization[1]) << ','
      << num(r.pipelined.utilization[2]) << ',' << r.pipelined.memory_high_water[1] << ','
      << r.transfer.total_bytes() << '\n';
  }
  return o.str();
}

void write_text(const std::filesystem::path& dir, const std::string& name, const std::string& text) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + (dir / name).string());
}

StrategySim simulate_strategy(const Dataset& ds, TrainConfig cfg, Strategy strategy, SimResult* trace) {
  cfg.strategy = strategy;
  const auto plan = plan_workload(ds, cfg);
  auto piped = simulate(skeleton_for(plan, cfg, true), cfg.devices);
  StrategySim row;
  row.strategy = strategy;
  row.pipelined = summarize(piped);
  row.serialized = summarize(simulate(skeleton_for(plan, cfg, false), cfg.devices));
  for (const auto& b : plan.batches) row.transfer += b.transfer;
  if (trace) *trace = std::move(piped);
  return row;
}

}  // namespace hetgnn
