#pragma once

// Shared by the serial loop and the threaded pipeline.

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "hetgnn/embedding_store.hpp"
#include "hetgnn/orchestrator.hpp"
#include "hetgnn/rng.hpp"

namespace hetgnn::detail {

inline constexpr std::uint64_t kEpochShuffleKey = 0xE90C;
inline constexpr std::uint64_t kBatchSampleKey = 0xBA7C;
inline constexpr std::uint64_t kStageSampleKey = 0x0E0B;
inline constexpr std::uint64_t kEvalKey = 0xE7A1;
inline constexpr std::uint64_t kPresampleKey = 0x407;
inline constexpr std::uint64_t kInitKey = 0x1417;

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

DenseMatrix gather_rows(const DenseMatrix& features, std::span<const VertexId> vertices,
                        const std::vector<std::uint8_t>* needed = nullptr);

// Stage 2 for chunk j of a staging plan, using bottom parameters `bottom`
// of `version`.
void stage_chunk(const Dataset& ds, const TrainConfig& cfg, const LayerParams& bottom, std::uint64_t version,
                 const StagingPlan& plan, std::size_t j, EmbeddingStore& store);

// Fast-role state: parameters, optimizer, epoch accumulation.
class Trainer {
 public:
  Trainer(const Dataset& ds, const TrainConfig& cfg, EmbeddingStore& store);

  BatchRecord train(const PlannedBatch& pb);
  const ModelParams& params() const { return params_; }
  ModelParams& params() { return params_; }

  // Folds a record into the running epoch; returns the finished epoch report
  // when pb was the epoch's last batch.
  std::optional<EpochReport> account(const PlannedBatch& pb, const BatchRecord& rec);

  // Set by the store observer (reading thread only).
  void note_gap(std::uint64_t gap) { batch_gap_ = std::max(batch_gap_, gap); }

  double wall_train = 0;

 private:
  const Dataset& ds_;
  const TrainConfig& cfg_;
  EmbeddingStore& store_;
  ModelParams params_;
  AdamState adam_;
  std::uint64_t batch_gap_ = 0;
  EpochReport cur_;
  std::size_t cur_batches_ = 0;
  std::size_t cur_seeds_ = 0;
  std::size_t cur_correct_ = 0;
};

struct RunSink {
  std::function<void(const PlannedBatch&, const BatchRecord&)> on_batch;  // fast role
  std::function<void(const SuperBatchPlan&)> on_plan;                      // coordinator
  double wall_sample = 0;
  double wall_stage2 = 0;
};

// Hard error when a super-batch's planned fallback exceeds the limit.
void check_fallback(const SuperBatchPlan& sp, const TrainConfig& cfg);

void run_serial(const Dataset& ds, const TrainConfig& cfg, const RunHooks& hooks, RunPlanner& planner,
                Trainer& trainer, EmbeddingStore& store, RunSink& sink);

// Coordinator on the calling thread plus fast-role and slow-role threads.
void run_pipelined(const Dataset& ds, const TrainConfig& cfg, const RunHooks& hooks, RunPlanner& planner,
                   Trainer& trainer, EmbeddingStore& store, RunSink& sink, bool stages);

}  // namespace hetgnn::detail
