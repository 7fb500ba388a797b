#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hetgnn/cache_policy.hpp"
#include "hetgnn/orchestrator.hpp"

namespace hetgnn {

// One policy at one fast-memory budget over cfg.epochs of the batch stream.
struct CacheSweepPoint {
  double budget_fraction = 0;  // of the full feature table
  std::uint64_t budget_bytes = 0;
  CachePolicy policy = CachePolicy::kNone;
  TransferRecord transfer;
  std::uint64_t data_bytes = 0;      // raw features + hot embeddings + backward aux
  std::uint64_t gradient_bytes = 0;  // bottom-layer sync (Hybrid only)
  std::uint64_t memory_bytes = 0;    // fast-device bytes used by the policy
  std::size_t cached_vertices = 0;
  std::size_t cpu_vertices = 0;
  double hit_rate = 0;  // cached rows / needed bottom rows
};

// Degree and PreSample fill the budget with raw feature rows. Hybrid takes
// the top min(hot_ratio V, budget / embedding row pair) vertices of the
// pre-sampled ranking, starts them all on cpu_compute, lets the closed-loop
// partitioner move vertices to gpu_cache with the memory left, and spends
// any remainder on raw rows of non-hot vertices.
std::vector<CacheSweepPoint> compare_cache(const Dataset& ds, const TrainConfig& cfg,
                                           std::span<const double> budget_fractions);

// Budget fractions swept by default.
std::vector<double> default_budget_fractions();

}  // namespace hetgnn
