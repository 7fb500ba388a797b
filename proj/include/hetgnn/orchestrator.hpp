#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hetgnn/cache_policy.hpp"
#include "hetgnn/device_sim.hpp"
#include "hetgnn/embedding_store.hpp"
#include "hetgnn/graph.hpp"
#include "hetgnn/hotness.hpp"
#include "hetgnn/model.hpp"
#include "hetgnn/sampler.hpp"
#include "hetgnn/workload.hpp"

namespace hetgnn {

enum class OptimizerKind { kSgd, kAdam };
std::string to_string(OptimizerKind k);
OptimizerKind parse_optimizer(const std::string& s);

// How much of a super-batch's hot queue the slow role manages to stage.
//  kUnbounded: the whole queue; the fast role waits at the boundary and the
//    hot-set partition is what keeps the slow role's load in check.
//  kModel: only as many vertices (hotness order) as fit in the slack of the
//    simulated super-batch window; the rest fall back to raw features.
enum class StagingCapacity { kModel, kUnbounded };
std::string to_string(StagingCapacity c);
StagingCapacity parse_staging_capacity(const std::string& s);

struct TrainConfig {
  ModelKind model = ModelKind::kGcn;
  std::size_t hidden_dim = 64;
  Fanouts fanouts = {25, 10, 5};  // bottom layer first; layers = fanouts.size()
  std::size_t batch_size = 1024;
  std::uint64_t super_batch_n = 4;
  double hot_ratio = 0.2;
  Strategy strategy = Strategy::kLayerBased;
  OptimizerKind optimizer = OptimizerKind::kSgd;
  Real lr = 0.05;
  std::uint32_t epochs = 1;
  std::uint64_t seed = 1;
  std::uint32_t presample_rounds = 3;
  // Raw-feature cache on the fast device (Case3, Case4, LayerBased gpu_cache).
  std::uint64_t cache_budget_bytes = 0;
  // Hard error when more than this fraction of a super-batch's hot rows miss.
  double fallback_limit = 0.5;
  StagingCapacity staging_capacity = StagingCapacity::kUnbounded;
  // Closed-loop partition refinement rounds before training.
  std::uint32_t planner_rounds = 4;
  // Threaded slow/fast roles; numerics are identical to the serial loop.
  bool pipelined = false;
  bool evaluate = true;
  std::uint32_t prefetch_depth = 2;
  DeviceSet devices = calibrated_devices();

  std::size_t layers() const { return fanouts.size(); }
  std::vector<std::size_t> dims(std::size_t feat_dim, std::size_t num_classes) const;
  // Throws ConfigError.
  void validate() const;
};

// Where hot vertices live for a run.
struct HotPlacement {
  HotnessTable hotness;                 // empty when not needed
  HotSetPartition partition;            // LayerBased only
  std::vector<std::uint8_t> cpu_mask;   // per vertex: embeddings staged by the slow role
  std::vector<std::uint32_t> hot_position;  // rank position per vertex
  FeatureCache cache;                   // raw features resident on the fast device
};

// Slow-role work for one target super-batch.
struct StagingPlan {
  std::uint64_t target_super_batch = 0;
  std::vector<VertexId> queue;   // hotness order, truncated to capacity
  std::size_t demand = 0;        // queue length before truncation
  std::vector<std::size_t> chunk_offsets;  // n + 1 boundaries into queue
  double budget_seconds = 0;
  StagingWork work;

  std::span<const VertexId> chunk(std::size_t j) const {
    return {queue.data() + chunk_offsets[j], chunk_offsets[j + 1] - chunk_offsets[j]};
  }
};

struct PlannedBatch {
  std::uint64_t global = 0;
  std::uint32_t epoch = 0;
  std::uint64_t super_batch = 0;
  bool last_of_epoch = false;
  std::vector<VertexId> seeds;
  SampledBlockStack stack;
  std::vector<std::uint8_t> reused;  // per bottom dst row
  std::size_t hot_rows = 0;          // rows in cpu_compute (reused or fallback)
  BatchWork work;
};

struct SuperBatchPlan {
  std::uint64_t index = 0;
  std::vector<PlannedBatch> batches;
  std::optional<StagingPlan> next;  // staged during this super-batch for index + 1
};

// Deterministic batch/super-batch walk shared by training and pure
// simulation. Super-batch k covers global batches [k n, (k+1) n) over the
// concatenated epochs.
class RunPlanner {
 public:
  RunPlanner(const Dataset& ds, const TrainConfig& cfg, const HotPlacement& placement);

  std::uint64_t batches_per_epoch() const { return per_epoch_; }
  std::uint64_t num_batches() const { return per_epoch_ * cfg_.epochs; }
  std::uint64_t num_super_batches() const;
  bool done() const { return next_sb_ >= num_super_batches(); }
  SuperBatchPlan next();

  const ModelShape& shape() const { return shape_; }
  // Seeds and stack for global batch g (pure function of config + g).
  std::vector<VertexId> seeds_of(std::uint64_t g) const;
  SampledBlockStack sample(std::uint64_t g) const;

 private:
  std::vector<PlannedBatch> sample_super_batch(std::uint64_t k) const;
  StagingPlan plan_staging(const std::vector<PlannedBatch>& current, const std::vector<PlannedBatch>& target,
                           std::uint64_t target_sb) const;
  void finish_batches(std::vector<PlannedBatch>& batches, const std::vector<std::uint8_t>* staged) const;

  const Dataset& ds_;
  TrainConfig cfg_;
  const HotPlacement& placement_;
  ModelShape shape_;
  std::vector<VertexId> train_;
  std::uint64_t per_epoch_ = 0;
  std::uint64_t next_sb_ = 0;
  std::vector<PlannedBatch> lookahead_;
  std::vector<std::uint8_t> staged_mask_;  // staged for next_sb_
  mutable std::vector<std::vector<std::vector<VertexId>>> epoch_batches_;
};

// Hot-set estimation and placement. LayerBased runs the closed-loop
// partitioner against simulated feedback over the first epoch; Case3/Case4
// fill a PreSample cache from the same table.
HotPlacement make_placement(const Dataset& ds, const TrainConfig& cfg);

// Closed-loop split of `hot` into cpu_compute and gpu_cache, then the rest
// of the raw-feature budget on the hottest non-hot vertices. With
// embeddings_in_budget the staged embeddings of cpu_compute vertices are
// charged against `budget` too (the hot set must fit all on cpu_compute).
HotPlacement place_hot_set(const Dataset& ds, const TrainConfig& cfg, HotnessTable table,
                           std::span<const VertexId> hot, std::uint64_t budget, bool embeddings_in_budget);

// Pre-sampled access counts over the training set for cfg's fanouts,
// batch size and presample_rounds.
HotnessTable presample_hotness(const Dataset& ds, const TrainConfig& cfg, std::uint32_t rounds = 0);

// Width of the bottom layer's output.
std::size_t emb_dim_of(const TrainConfig& cfg, const Dataset& ds);

// Partition refinement feedback from one simulated epoch.
struct PlannerFeedback {
  PartitionFeedback feedback;
  double makespan = 0;
  TransferRecord transfer;
};
PlannerFeedback measure_feedback(const Dataset& ds, const TrainConfig& cfg, const HotPlacement& placement);

// Fast-device bytes resident for the whole run.
std::uint64_t fast_resident_bytes(const Dataset& ds, const TrainConfig& cfg, const HotPlacement& placement);
std::uint64_t slow_resident_bytes(const Dataset& ds);

struct BatchRecord {
  std::uint64_t batch = 0;
  std::uint32_t epoch = 0;
  std::uint64_t super_batch = 0;
  std::size_t num_seeds = 0;
  Real loss = 0;
  std::size_t correct = 0;
  std::size_t hot_rows = 0;
  std::size_t reused_rows = 0;
  std::size_t fallback_rows = 0;
  TransferRecord transfer;
  Real max_weight_change = 0;
  std::uint64_t max_gap = 0;  // largest version gap among this batch's reuses
};

struct SimSummary {
  double makespan = 0;
  double critical_path = 0;
  std::array<double, kNumResources> utilization{};
  std::array<std::uint64_t, kNumResources> memory_high_water{};
};

struct EpochReport {
  std::uint32_t epoch = 0;
  Real mean_loss = 0;
  double train_accuracy = 0;
  double val_accuracy = 0;
  double test_accuracy = 0;
  TransferRecord transfer;
  std::uint64_t reuse_hits = 0;
  std::uint64_t fallbacks = 0;
  std::uint64_t cache_hits = 0;
  double wall_train = 0;  // seconds of this process, not simulated devices
  SimSummary sim;
};

struct RunReport {
  std::string dataset;
  std::uint64_t fingerprint = 0;
  TrainConfig config;
  HotSetPartition partition;
  std::uint64_t cache_rows = 0;
  std::vector<BatchRecord> batches;
  std::vector<EpochReport> epochs;
  std::vector<double> epsilon;  // per super-batch: max per-step weight change x 2n
  std::vector<StagingPlan> staging;  // staging plans (queues dropped) for reporting
  std::uint64_t max_gap = 0;
  std::uint64_t staged_vertices = 0;
  SimSummary sim;  // whole run
  // Wall-clock seconds spent by this process per role.
  double wall_sample = 0;
  double wall_stage2 = 0;
  double wall_train = 0;
  ModelParams final_params;

  std::vector<Real> losses() const;
};

// Observation points for tests. All callbacks may be invoked from worker
// threads in pipelined mode.
struct RunHooks {
  std::function<void(const ReuseEvent&)> on_reuse;
  // Slow role computed a chunk for `target_super_batch` with bottom parameters
  // of `version`; `fast_version` is the fast role's version at that moment.
  std::function<void(std::uint64_t version, std::uint64_t target_super_batch, std::uint64_t fast_version)> on_stage;
  // When non-zero, worker threads yield or sleep at random points.
  std::uint64_t jitter_seed = 0;
};

// Sample-based mini-batch training under cfg.strategy. Throws SimulatedOom
// when resident or per-batch memory exceeds a simulated device, ConfigError
// when fallback exceeds cfg.fallback_limit.
RunReport run_training(const Dataset& ds, const TrainConfig& cfg, const RunHooks& hooks = {});

// Simulated cost of the whole run without numerics.
struct WorkloadPlan {
  HotPlacement placement;
  std::vector<BatchWork> batches;
  std::vector<StagingWork> staging;
  std::uint64_t fast_resident = 0;
  std::uint64_t slow_resident = 0;
};
WorkloadPlan plan_workload(const Dataset& ds, const TrainConfig& cfg);
WorkloadPlan plan_workload(const Dataset& ds, const TrainConfig& cfg, HotPlacement placement);
TaskGraph skeleton_for(const WorkloadPlan& plan, const TrainConfig& cfg, bool pipelined = true);
SimSummary summarize(const SimResult& r);

// Fast-role stall waiting for Stage 2, averaged per super-batch.
double stage2_stall_per_super_batch(const SimResult& r, std::uint64_t n);

// eps_k = max per-step weight change within super-batch k, times 2n.
std::vector<double> epsilon_trace(const std::vector<Real>& max_changes, std::uint64_t n);

// Sampled inference accuracy over `vertices` with a fixed sampling seed.
double evaluate_accuracy(const Dataset& ds, const ModelParams& params, const Fanouts& fanouts,
                         std::span<const VertexId> vertices, std::size_t batch_size, std::uint64_t seed);

}  // namespace hetgnn
