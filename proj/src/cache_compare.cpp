#include "hetgnn/cache_compare.hpp"

#include <algorithm>
#include <cmath>

#include "trainer.hpp"

namespace hetgnn {

std::vector<double> default_budget_fractions() { return {0.0, 0.01, 0.02, 0.05, 0.1, 0.2}; }

namespace {

CacheSweepPoint measure(const Dataset& ds, const TrainConfig& cfg, HotPlacement placement) {
  const auto plan = plan_workload(ds, cfg, std::move(placement));
  CacheSweepPoint pt;
  for (const auto& b : plan.batches) pt.transfer += b.transfer;
  const auto& t = pt.transfer;
  pt.data_bytes = (t.raw_feature_reals + t.hot_embedding_reals + t.backward_aux_reals) * kRealSize;
  pt.gradient_bytes = t.gradient_reals * kRealSize;
  const auto& p = plan.placement;
  pt.cached_vertices = p.cache.vertices.size();
  pt.cpu_vertices = p.partition.cpu_compute.size();
  pt.memory_bytes = p.cache.bytes + (pt.cpu_vertices > 0 ? p.partition.embedding_bytes : 0);
  const double needed = static_cast<double>(t.cached_rows + t.raw_rows);
  pt.hit_rate = needed > 0 ? static_cast<double>(t.cached_rows) / needed : 0.0;
  return pt;
}

}  // namespace

std::vector<CacheSweepPoint> compare_cache(const Dataset& ds, const TrainConfig& cfg,
                                           std::span<const double> budget_fractions) {
  cfg.validate();
  const VertexId nv = ds.graph.num_vertices();
  const std::size_t feat = ds.data.feat_dim();
  const std::uint64_t table_bytes = ds.data.features.size() * kRealSize;
  const std::uint64_t emb_pair = 2 * static_cast<std::uint64_t>(emb_dim_of(cfg, ds)) * kRealSize;
  const auto table = presample_hotness(ds, cfg);
  // Static caches: feature cache, no embedding reuse.
  TrainConfig fixed = cfg;
  fixed.strategy = Strategy::kCase3;
  TrainConfig hybrid = cfg;
  hybrid.strategy = Strategy::kLayerBased;

  std::vector<CacheSweepPoint> out;
  for (double f : budget_fractions) {
    if (!(f >= 0.0)) throw ConfigError("compare_cache: budget fractions must be >= 0");
    const auto budget = static_cast<std::uint64_t>(std::floor(f * static_cast<double>(table_bytes)));
    for (CachePolicy policy : {CachePolicy::kDegree, CachePolicy::kPreSample, CachePolicy::kHybrid}) {
      CacheSweepPoint pt;
      if (policy == CachePolicy::kHybrid) {
        const auto by_ratio = select_hot(table, cfg.hot_ratio).size();
        const std::size_t count = std::min<std::size_t>(by_ratio, budget / emb_pair);
        const std::vector<VertexId> hot(table.rank.begin(), table.rank.begin() + static_cast<std::ptrdiff_t>(count));
        TrainConfig h = hybrid;
        h.cache_budget_bytes = budget;
        pt = measure(ds, h, place_hot_set(ds, h, table, hot, budget, true));
      } else {
        HotPlacement p;
        p.cache = policy == CachePolicy::kDegree ? degree_cache(ds.graph, budget, feat)
                                                 : presample_cache(table, budget, feat);
        if (p.cache.mask.empty()) p.cache.mask.assign(nv, 0);
        TrainConfig c = fixed;
        c.cache_budget_bytes = budget;
        pt = measure(ds, c, std::move(p));
      }
      pt.budget_fraction = f;
      pt.budget_bytes = budget;
      pt.policy = policy;
      out.push_back(pt);
    }
  }
  return out;
}

}  // namespace hetgnn
