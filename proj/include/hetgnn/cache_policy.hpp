#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hetgnn/graph.hpp"
#include "hetgnn/hotness.hpp"

namespace hetgnn {

enum class CachePolicy { kNone, kDegree, kPreSample, kHybrid };

std::string to_string(CachePolicy p);
CachePolicy parse_cache_policy(const std::string& s);

// Raw-feature rows resident on the fast device.
struct FeatureCache {
  std::vector<VertexId> vertices;     // fill order
  std::vector<std::uint8_t> mask;     // per vertex
  std::uint64_t bytes = 0;

  bool contains(VertexId v) const { return v < mask.size() && mask[v]; }
};

// Number of feature rows that fit in `budget_bytes`.
std::size_t rows_in_budget(std::uint64_t budget_bytes, std::size_t feat_dim);

// Highest in-degree first (ties by ascending id).
FeatureCache degree_cache(const Graph& graph, std::uint64_t budget_bytes, std::size_t feat_dim);

// Pre-sampled hotness rank order.
FeatureCache presample_cache(const HotnessTable& table, std::uint64_t budget_bytes, std::size_t feat_dim);

// Cache an explicit vertex list in order, as far as the budget allows.
// Vertices flagged in `skip` are passed over.
FeatureCache cache_from_list(std::span<const VertexId> order, VertexId num_vertices, std::uint64_t budget_bytes,
                             std::size_t feat_dim, std::span<const std::uint8_t> skip = {});

}  // namespace hetgnn
