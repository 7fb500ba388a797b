#include "hetgnn/cache_policy.hpp"

#include <algorithm>
#include <numeric>

namespace hetgnn {

std::string to_string(CachePolicy p) {
  switch (p) {
    case CachePolicy::kNone:
      return "none";
    case CachePolicy::kDegree:
      return "degree";
    case CachePolicy::kPreSample:
      return "presample";
    case CachePolicy::kHybrid:
      return "hybrid";
  }
  return "?";
}

CachePolicy parse_cache_policy(const std::string& s) {
  for (auto p : {CachePolicy::kNone, CachePolicy::kDegree, CachePolicy::kPreSample, CachePolicy::kHybrid}) {
    if (to_string(p) == s) return p;
  }
  throw ConfigError("unknown cache policy '" + s + "' (expected none, degree, presample or hybrid)");
}

std::size_t rows_in_budget(std::uint64_t budget_bytes, std::size_t feat_dim) {
  const std::uint64_t row = static_cast<std::uint64_t>(feat_dim) * kRealSize;
  return row == 0 ? 0 : static_cast<std::size_t>(budget_bytes / row);
}

FeatureCache cache_from_list(std::span<const VertexId> order, VertexId num_vertices, std::uint64_t budget_bytes,
                             std::size_t feat_dim, std::span<const std::uint8_t> skip) {
  FeatureCache c;
  c.mask.assign(num_vertices, 0);
  const std::size_t cap = rows_in_budget(budget_bytes, feat_dim);
  for (VertexId v : order) {
    if (c.vertices.size() >= cap) break;
    if (v >= num_vertices) throw std::invalid_argument("cache_from_list: vertex out of range");
    if ((!skip.empty() && skip[v]) || c.mask[v]) continue;
    c.mask[v] = 1;
    c.vertices.push_back(v);
  }
  c.bytes = c.vertices.size() * static_cast<std::uint64_t>(feat_dim) * kRealSize;
  return c;
}

FeatureCache degree_cache(const Graph& graph, std::uint64_t budget_bytes, std::size_t feat_dim) {
  std::vector<VertexId> order(graph.num_vertices());
  std::iota(order.begin(), order.end(), VertexId{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](VertexId a, VertexId b) { return graph.degree(a) > graph.degree(b); });
  return cache_from_list(order, graph.num_vertices(), budget_bytes, feat_dim);
}

FeatureCache presample_cache(const HotnessTable& table, std::uint64_t budget_bytes, std::size_t feat_dim) {
  return cache_from_list(table.rank, static_cast<VertexId>(table.counts.size()), budget_bytes, feat_dim);
}

}  // namespace hetgnn
