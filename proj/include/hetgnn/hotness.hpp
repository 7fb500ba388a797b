#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hetgnn/graph.hpp"
#include "hetgnn/sampler.hpp"

namespace hetgnn {

struct HotnessTable {
  std::vector<std::uint64_t> counts;  // per vertex
  std::uint32_t rounds = 0;
  std::vector<VertexId> rank;  // descending count, ascending id on ties

  static HotnessTable from_counts(std::vector<std::uint64_t> counts, std::uint32_t rounds);
  // Position of each vertex in `rank`.
  std::vector<std::uint32_t> positions() const;
};

// Seeds of batch `b` for one pass over `train` in the order given by
// `shuffle_seed`. Shared by pre-sampling and training so both walk the same
// batch structure.
std::vector<std::vector<VertexId>> make_batches(std::span<const VertexId> train, std::size_t batch_size,
                                                std::uint64_t shuffle_seed);

// Pre-sampling: `rounds` simulated epochs, each shuffling the train set and
// sampling every batch; counts occurrences of each vertex in the bottom
// block's src list (the raw-feature gather frontier).
HotnessTable estimate_hotness(const Graph& graph, std::span<const VertexId> train_set,
                              const Fanouts& fanouts, std::uint32_t rounds, std::uint64_t seed,
                              std::size_t batch_size = 1024);

// First floor(ratio * V) entries of the rank.
std::vector<VertexId> select_hot(const HotnessTable& table, double hot_ratio);

struct PartitionFeedback {
  double observed_fast_idle_time = 0.0;  // seconds per super-batch
  std::uint64_t free_fast_memory = 0;    // bytes
  // Slow-device time saved per vertex moved off cpu_compute; each move
  // shrinks the idle estimate by this much.
  double slow_time_per_vertex = 0.0;
};

struct HotSetPartition {
  std::vector<VertexId> cpu_compute;  // hotness order
  std::vector<VertexId> gpu_cache;    // hotness order
  double hot_ratio = 0.0;
  std::uint64_t cache_bytes = 0;      // raw feature rows on the fast device
  std::uint64_t embedding_bytes = 0;  // double-buffered staged embeddings

  std::size_t size() const { return cpu_compute.size() + gpu_cache.size(); }
  // Per-vertex membership: 0 = not hot, 1 = cpu_compute, 2 = gpu_cache.
  std::vector<std::uint8_t> membership(VertexId num_vertices) const;
};

// Moves the hottest vertices from cpu_compute to gpu_cache one at a time
// while idle time remains and a feature row still fits.
HotSetPartition partition_hot(std::span<const VertexId> hot_list, const PartitionFeedback& feedback,
                              std::size_t feat_dim, std::size_t emb_dim, double hot_ratio = 0.0);

// Closed-loop wrapper: smooths idle-time observations with an EMA before
// calling partition_hot.
class HotPartitioner {
 public:
  explicit HotPartitioner(double alpha = 0.5) : alpha_(alpha) {}
  HotSetPartition update(std::span<const VertexId> hot_list, PartitionFeedback feedback,
                         std::size_t feat_dim, std::size_t emb_dim, double hot_ratio);
  double idle_estimate() const { return idle_; }

 private:
  double alpha_;
  double idle_ = 0.0;
  bool primed_ = false;
};

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace hetgnn
