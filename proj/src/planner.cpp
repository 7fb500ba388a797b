#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "hetgnn/orchestrator.hpp"
#include "hetgnn/rng.hpp"
#include "trainer.hpp"

namespace hetgnn {

std::string to_string(OptimizerKind k) { return k == OptimizerKind::kSgd ? "sgd" : "adam"; }

OptimizerKind parse_optimizer(const std::string& s) {
  if (s == "sgd") return OptimizerKind::kSgd;
  if (s == "adam") return OptimizerKind::kAdam;
  throw ConfigError("unknown optimizer '" + s + "' (expected sgd or adam)");
}

std::string to_string(StagingCapacity c) { return c == StagingCapacity::kModel ? "model" : "unbounded"; }

StagingCapacity parse_staging_capacity(const std::string& s) {
  if (s == "model") return StagingCapacity::kModel;
  if (s == "unbounded") return StagingCapacity::kUnbounded;
  throw ConfigError("unknown staging capacity '" + s + "' (expected model or unbounded)");
}

std::vector<std::size_t> TrainConfig::dims(std::size_t feat_dim, std::size_t num_classes) const {
  std::vector<std::size_t> d;
  d.push_back(feat_dim);
  for (std::size_t l = 0; l + 1 < layers(); ++l) d.push_back(hidden_dim);
  d.push_back(num_classes);
  return d;
}

void TrainConfig::validate() const {
  if (fanouts.empty()) throw ConfigError("fanouts must list at least one layer");
  for (auto f : fanouts) {
    if (f == 0) throw ConfigError("fanouts must be >= 1");
  }
  if (hidden_dim == 0) throw ConfigError("hidden_dim must be >= 1");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (super_batch_n == 0) throw ConfigError("super_batch_n must be >= 1");
  if (!(hot_ratio >= 0.0 && hot_ratio <= 1.0)) throw ConfigError("hot_ratio must be in [0, 1]");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be finite and >= 0");
  if (epochs == 0) throw ConfigError("epochs must be >= 1");
  if (presample_rounds == 0) throw ConfigError("presample_rounds must be >= 1");
  if (!(fallback_limit >= 0.0 && fallback_limit <= 1.0)) throw ConfigError("fallback_limit must be in [0, 1]");
  if (prefetch_depth == 0) throw ConfigError("prefetch_depth must be >= 1");
  devices.validate();
}

std::vector<Real> RunReport::losses() const {
  std::vector<Real> out;
  out.reserve(batches.size());
  for (const auto& b : batches) out.push_back(b.loss);
  return out;
}

// ---------------------------------------------------------------- planner

RunPlanner::RunPlanner(const Dataset& ds, const TrainConfig& cfg, const HotPlacement& placement)
    : ds_(ds), cfg_(cfg), placement_(placement) {
  cfg_.validate();
  train_ = ds.data.train_vertices();
  if (train_.empty()) throw ConfigError("dataset has no training vertices");
  per_epoch_ = (train_.size() + cfg_.batch_size - 1) / cfg_.batch_size;
  shape_.kind = cfg_.model;
  shape_.dims = cfg_.dims(ds.data.feat_dim(), static_cast<std::size_t>(ds.data.num_classes));
  epoch_batches_.resize(cfg_.epochs);
}

std::uint64_t RunPlanner::num_super_batches() const {
  return (num_batches() + cfg_.super_batch_n - 1) / cfg_.super_batch_n;
}

std::vector<VertexId> RunPlanner::seeds_of(std::uint64_t g) const {
  const auto e = static_cast<std::size_t>(g / per_epoch_);
  auto& eb = epoch_batches_.at(e);
  if (eb.empty()) eb = make_batches(train_, cfg_.batch_size, derive_seed(cfg_.seed, {detail::kEpochShuffleKey, e}));
  return eb[g % per_epoch_];
}

SampledBlockStack RunPlanner::sample(std::uint64_t g) const {
  const auto seeds = seeds_of(g);
  const auto rng = derive_seed(cfg_.seed, {detail::kBatchSampleKey, g});
  if (cfg_.strategy == Strategy::kLayerBased && !placement_.cpu_mask.empty()) {
    return sample_khop_skip_hot(ds_.graph, seeds, cfg_.fanouts, placement_.cpu_mask, rng);
  }
  return sample_khop(ds_.graph, seeds, cfg_.fanouts, rng);
}

std::vector<PlannedBatch> RunPlanner::sample_super_batch(std::uint64_t k) const {
  std::vector<PlannedBatch> out;
  const std::uint64_t lo = k * cfg_.super_batch_n;
  const std::uint64_t hi = std::min(num_batches(), lo + cfg_.super_batch_n);
  for (std::uint64_t g = lo; g < hi; ++g) {
    PlannedBatch pb;
    pb.global = g;
    pb.epoch = static_cast<std::uint32_t>(g / per_epoch_);
    pb.super_batch = k;
    pb.last_of_epoch = (g + 1) % per_epoch_ == 0;
    pb.seeds = seeds_of(g);
    pb.stack = sample(g);
    out.push_back(std::move(pb));
  }
  return out;
}

void RunPlanner::finish_batches(std::vector<PlannedBatch>& batches, const std::vector<std::uint8_t>* staged) const {
  // Staged embeddings stay on the fast device for the rest of the super-batch.
  std::vector<std::uint8_t> resident(ds_.graph.num_vertices(), 0);
  for (auto& pb : batches) {
    const Block& bottom = pb.stack.blocks[0];
    pb.reused.assign(bottom.num_dst(), 0);
    pb.hot_rows = 0;
    if (!pb.stack.hot_flags.empty()) {
      for (std::size_t i = 0; i < bottom.num_dst(); ++i) {
        if (!pb.stack.hot_flags[i]) continue;
        ++pb.hot_rows;
        if (staged != nullptr && !staged->empty() && (*staged)[bottom.dst_vertices[i]]) pb.reused[i] = 1;
      }
    }
    pb.work = measure_batch(pb.stack, pb.reused, placement_.cache.mask, shape_, cfg_.strategy,
                            static_cast<std::int64_t>(pb.global), static_cast<std::int64_t>(pb.super_batch), &resident);
  }
}

StagingPlan RunPlanner::plan_staging(const std::vector<PlannedBatch>& current, const std::vector<PlannedBatch>& target,
                                     std::uint64_t target_sb) const {
  StagingPlan sp;
  sp.target_super_batch = target_sb;
  std::vector<std::uint8_t> seen(ds_.graph.num_vertices(), 0);
  for (const auto& pb : target) {
    const Block& bottom = pb.stack.blocks[0];
    for (std::size_t i = 0; i < bottom.num_dst(); ++i) {
      const VertexId v = bottom.dst_vertices[i];
      if (pb.stack.hot_flags[i] && !seen[v]) {
        seen[v] = 1;
        sp.queue.push_back(v);
      }
    }
  }
  std::sort(sp.queue.begin(), sp.queue.end(), [&](VertexId a, VertexId b) {
    return placement_.hot_position[a] < placement_.hot_position[b];
  });
  sp.demand = sp.queue.size();
  const auto stage_seed = derive_seed(cfg_.seed, {detail::kStageSampleKey, target_sb});

  if (cfg_.staging_capacity == StagingCapacity::kModel && !sp.queue.empty()) {
    const DeviceSet& d = cfg_.devices;
    double fast_busy = 0;
    double link_busy = 0;
    double slow_busy = 0;
    for (const auto& pb : current) {
      const auto& w = pb.work;
      fast_busy += w.sample_edges_cold / d.fast.sample_rate + w.cached_rows / d.fast.gather_rate +
                   w.train_ops / d.fast.compute_rate;
      link_busy += static_cast<double>(w.transfer.total_bytes()) / d.link.bandwidth;
      slow_busy += (w.gather_rows - w.cached_rows) / d.slow.gather_rate;
    }
    const double window = std::max(fast_busy, link_busy);
    sp.budget_seconds = std::max(0.0, window - slow_busy);
    const Block full = sample_one_hop_hot(ds_.graph, sp.queue, cfg_.fanouts[0], stage_seed);
    double used = 0;
    std::size_t keep = 0;
    for (; keep < sp.queue.size(); ++keep) {
      const auto e = static_cast<double>(full.sources_of(keep).size());
      const double cost = e / d.slow.sample_rate + e / d.slow.gather_rate +
                          layer_forward_ops(cfg_.model, full.sources_of(keep).size(), 1, shape_.feat_dim(),
                                            shape_.emb_dim()) /
                              d.slow.compute_rate;
      if (used + cost > sp.budget_seconds) break;
      used += cost;
    }
    sp.queue.resize(keep);
  }

  const std::size_t n = cfg_.super_batch_n;
  sp.chunk_offsets.resize(n + 1);
  for (std::size_t j = 0; j <= n; ++j) sp.chunk_offsets[j] = j * sp.queue.size() / n;
  sp.work.super_batch = static_cast<std::int64_t>(target_sb);
  for (std::size_t j = 0; j < n; ++j) {
    const auto c = sp.chunk(j);
    if (c.empty()) continue;
    const auto w = measure_staging(sample_one_hop_hot(ds_.graph, c, cfg_.fanouts[0], stage_seed), shape_,
                                   static_cast<std::int64_t>(target_sb));
    sp.work.vertices += w.vertices;
    sp.work.sample_edges += w.sample_edges;
    sp.work.gather_rows += w.gather_rows;
    sp.work.compute_ops += w.compute_ops;
  }
  return sp;
}

SuperBatchPlan RunPlanner::next() {
  if (done()) throw ContractViolation("RunPlanner::next past the last super-batch");
  SuperBatchPlan sp;
  sp.index = next_sb_;
  sp.batches = lookahead_.empty() ? sample_super_batch(next_sb_) : std::move(lookahead_);
  lookahead_.clear();
  finish_batches(sp.batches, next_sb_ == 0 ? nullptr : &staged_mask_);
  staged_mask_.clear();
  const bool stages = cfg_.strategy == Strategy::kLayerBased && !placement_.cpu_mask.empty() &&
                      !placement_.partition.cpu_compute.empty();
  if (stages && next_sb_ + 1 < num_super_batches()) {
    lookahead_ = sample_super_batch(next_sb_ + 1);
    sp.next = plan_staging(sp.batches, lookahead_, next_sb_ + 1);
    staged_mask_.assign(ds_.graph.num_vertices(), 0);
    for (VertexId v : sp.next->queue) staged_mask_[v] = 1;
  }
  ++next_sb_;
  return sp;
}

// ---------------------------------------------------------------- placement

std::uint64_t fast_resident_bytes(const Dataset& ds, const TrainConfig& cfg, const HotPlacement& placement) {
  ModelShape shape{cfg.model, cfg.dims(ds.data.feat_dim(), static_cast<std::size_t>(ds.data.num_classes))};
  const std::uint64_t copies = cfg.optimizer == OptimizerKind::kAdam ? 4 : 2;  // params, grads, moments
  std::uint64_t b = shape.parameter_reals() * copies * kRealSize + placement.cache.bytes;
  if (samples_on_fast(cfg.strategy)) b += ds.graph.topology_bytes();
  if (cfg.strategy == Strategy::kLayerBased) b += placement.partition.embedding_bytes;
  return b;
}

std::uint64_t slow_resident_bytes(const Dataset& ds) {
  return ds.graph.topology_bytes() + ds.data.features.size() * kRealSize;
}

WorkloadPlan plan_workload(const Dataset& ds, const TrainConfig& cfg, HotPlacement placement) {
  WorkloadPlan wp;
  wp.placement = std::move(placement);
  RunPlanner planner(ds, cfg, wp.placement);
  while (!planner.done()) {
    auto sp = planner.next();
    for (auto& pb : sp.batches) wp.batches.push_back(pb.work);
    if (sp.next) wp.staging.push_back(sp.next->work);
  }
  wp.fast_resident = fast_resident_bytes(ds, cfg, wp.placement);
  wp.slow_resident = slow_resident_bytes(ds);
  return wp;
}

WorkloadPlan plan_workload(const Dataset& ds, const TrainConfig& cfg) {
  return plan_workload(ds, cfg, make_placement(ds, cfg));
}

TaskGraph skeleton_for(const WorkloadPlan& plan, const TrainConfig& cfg, bool pipelined) {
  SkeletonOptions o;
  o.strategy = cfg.strategy;
  o.pipelined = pipelined;
  o.n = cfg.super_batch_n;
  o.prefetch_depth = cfg.prefetch_depth;
  o.fast_resident_bytes = plan.fast_resident;
  o.slow_resident_bytes = plan.slow_resident;
  return build_skeleton(plan.batches, plan.staging, o);
}

SimSummary summarize(const SimResult& r) {
  SimSummary s;
  s.makespan = r.makespan;
  s.critical_path = r.critical_path;
  s.utilization = r.utilization;
  s.memory_high_water = r.memory_high_water;
  return s;
}

double stage2_stall_per_super_batch(const SimResult& r, std::uint64_t n) {
  std::map<std::int64_t, double> staged, ready;
  for (const auto& e : r.events) {
    if (e.stage == "stage2") {
      staged[e.super_batch] = std::max(staged[e.super_batch], e.end);
    } else if (e.stage == "sample") {
      ready[e.super_batch] = std::max(ready[e.super_batch], e.end);
    } else if (e.stage == "train" && e.batch >= 0 && (static_cast<std::uint64_t>(e.batch) + 1) % n == 0) {
      const auto next_sb = static_cast<std::int64_t>((static_cast<std::uint64_t>(e.batch) + 1) / n);
      ready[next_sb] = std::max(ready[next_sb], e.end);
    }
  }
  if (staged.empty()) return 0.0;
  double stall = 0;
  for (const auto& [sb, t] : staged) stall += std::max(0.0, t - ready[sb]);
  return stall / static_cast<double>(staged.size());
}

PlannerFeedback measure_feedback(const Dataset& ds, const TrainConfig& cfg, const HotPlacement& placement) {
  TrainConfig one = cfg;
  one.epochs = 1;
  const auto plan = plan_workload(ds, one, placement);
  const auto sim = simulate(skeleton_for(plan, one, true), one.devices);
  PlannerFeedback fb;
  fb.makespan = sim.makespan;
  fb.feedback.observed_fast_idle_time = stage2_stall_per_super_batch(sim, one.super_batch_n);
  double secs = 0, verts = 0;
  for (const auto& s : plan.staging) {
    secs += staging_seconds(s, one.devices);
    verts += s.vertices;
  }
  fb.feedback.slow_time_per_vertex = verts > 0 ? secs / verts : 0.0;
  fb.feedback.free_fast_memory =
      cfg.cache_budget_bytes > placement.cache.bytes ? cfg.cache_budget_bytes - placement.cache.bytes : 0;
  for (const auto& b : plan.batches) fb.transfer += b.transfer;
  return fb;
}

namespace {

// gpu_cache rows first, then the remaining budget on the hottest vertices
// that are not hot-set members.
void apply_partition(HotPlacement& p, const HotSetPartition& part, VertexId num_vertices, std::uint64_t budget,
                     std::size_t feat_dim) {
  p.partition = part;
  p.cpu_mask.assign(num_vertices, 0);
  for (VertexId v : part.cpu_compute) p.cpu_mask[v] = 1;
  std::vector<VertexId> order(part.gpu_cache.begin(), part.gpu_cache.end());
  order.insert(order.end(), p.hotness.rank.begin(), p.hotness.rank.end());
  p.cache = cache_from_list(order, num_vertices, budget, feat_dim, p.cpu_mask);
}

}  // namespace

std::size_t emb_dim_of(const TrainConfig& cfg, const Dataset& ds) {
  return cfg.layers() > 1 ? cfg.hidden_dim : static_cast<std::size_t>(ds.data.num_classes);
}

HotPlacement place_hot_set(const Dataset& ds, const TrainConfig& cfg, HotnessTable table,
                           std::span<const VertexId> hot, std::uint64_t budget, bool embeddings_in_budget) {
  HotPlacement p;
  const VertexId nv = ds.graph.num_vertices();
  const std::size_t feat = ds.data.feat_dim();
  const std::size_t emb = emb_dim_of(cfg, ds);
  p.hotness = std::move(table);
  p.hot_position = p.hotness.positions();
  const std::uint64_t all_cpu = 2 * hot.size() * static_cast<std::uint64_t>(emb) * kRealSize;
  if (embeddings_in_budget && all_cpu > budget) throw ConfigError("place_hot_set: hot embeddings exceed the budget");
  const std::uint64_t free = embeddings_in_budget ? budget - all_cpu : budget;
  auto cache_budget = [&](const HotSetPartition& part) {
    return embeddings_in_budget ? budget - part.embedding_bytes : budget;
  };
  auto part = partition_hot(hot, {}, feat, emb, cfg.hot_ratio);
  apply_partition(p, part, nv, cache_budget(part), feat);
  if (hot.empty() || rows_in_budget(free, feat) == 0) return p;

  TrainConfig probe = cfg;
  probe.strategy = Strategy::kLayerBased;
  HotPartitioner controller;
  double per_vertex = 0;
  for (std::uint32_t r = 0; r < cfg.planner_rounds; ++r) {
    auto fb = measure_feedback(ds, probe, p).feedback;
    if (fb.slow_time_per_vertex > 0) per_vertex = fb.slow_time_per_vertex;
    fb.slow_time_per_vertex = per_vertex;
    // Idle time the all-cpu_compute split would show: vertices already moved
    // would put their slow-role time back.
    fb.observed_fast_idle_time += static_cast<double>(p.partition.gpu_cache.size()) * per_vertex;
    fb.free_fast_memory = free;
    auto next = controller.update(hot, fb, feat, emb, cfg.hot_ratio);
    if (next.gpu_cache == p.partition.gpu_cache) break;
    apply_partition(p, next, nv, cache_budget(next), feat);
  }
  return p;
}

HotnessTable presample_hotness(const Dataset& ds, const TrainConfig& cfg, std::uint32_t rounds) {
  return estimate_hotness(ds.graph, ds.data.train_vertices(), cfg.fanouts, rounds ? rounds : cfg.presample_rounds,
                          derive_seed(cfg.seed, {detail::kPresampleKey}), cfg.batch_size);
}

HotPlacement make_placement(const Dataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  HotPlacement p;
  const VertexId nv = ds.graph.num_vertices();
  const std::size_t feat = ds.data.feat_dim();
  const bool layer_based = cfg.strategy == Strategy::kLayerBased && cfg.hot_ratio > 0;
  const bool cached = uses_feature_cache(cfg.strategy) && cfg.cache_budget_bytes > 0;
  p.cache.mask.assign(nv, 0);
  if (!layer_based && !cached) return p;

  auto table = presample_hotness(ds, cfg);
  if (!layer_based) {
    p.hotness = std::move(table);
    p.hot_position = p.hotness.positions();
    p.cache = presample_cache(p.hotness, cfg.cache_budget_bytes, feat);
    return p;
  }
  const auto hot = select_hot(table, cfg.hot_ratio);
  return place_hot_set(ds, cfg, std::move(table), hot, cfg.cache_budget_bytes, false);
}

}  // namespace hetgnn
