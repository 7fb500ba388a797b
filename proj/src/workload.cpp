#include "hetgnn/workload.hpp"

#include <algorithm>
#include <stdexcept>

namespace hetgnn {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kCase1:
      return "case1";
    case Strategy::kCase2:
      return "case2";
    case Strategy::kCase3:
      return "case3";
    case Strategy::kCase4:
      return "case4";
    case Strategy::kLayerBased:
      return "layer-based";
  }
  return "?";
}

Strategy parse_strategy(const std::string& s) {
  for (Strategy k : kAllStrategies) {
    if (to_string(k) == s) return k;
  }
  if (s == "layer_based" || s == "layerbased") return Strategy::kLayerBased;
  throw ConfigError("unknown strategy '" + s + "' (expected case1..case4 or layer-based)");
}

bool uses_feature_cache(Strategy s) {
  return s == Strategy::kCase3 || s == Strategy::kCase4 || s == Strategy::kLayerBased;
}

bool samples_on_fast(Strategy s) {
  return s == Strategy::kCase2 || s == Strategy::kCase4 || s == Strategy::kLayerBased;
}

TransferRecord& TransferRecord::operator+=(const TransferRecord& o) {
  raw_feature_reals += o.raw_feature_reals;
  hot_embedding_reals += o.hot_embedding_reals;
  backward_aux_reals += o.backward_aux_reals;
  gradient_reals += o.gradient_reals;
  raw_rows += o.raw_rows;
  cached_rows += o.cached_rows;
  reused_rows += o.reused_rows;
  moved_embeddings += o.moved_embeddings;
  return *this;
}

TransferRecord account_transfer(const Block& bottom, std::span<const std::uint8_t> reused_rows,
                                std::span<const std::uint8_t> cached, std::size_t feat_dim,
                                std::size_t emb_dim, std::vector<std::uint8_t>* emb_resident) {
  if (!reused_rows.empty() && reused_rows.size() != bottom.num_dst()) {
    throw ShapeError("account_transfer: reuse mask size != bottom dst count");
  }
  std::vector<std::uint8_t> needed(bottom.num_src(), 0);
  TransferRecord t;
  for (std::size_t i = 0; i < bottom.num_dst(); ++i) {
    if (!reused_rows.empty() && reused_rows[i]) {
      ++t.reused_rows;
      const VertexId v = bottom.dst_vertices[i];
      if (emb_resident == nullptr || !(*emb_resident)[v]) {
        ++t.moved_embeddings;
        if (emb_resident != nullptr) (*emb_resident)[v] = 1;
      }
      continue;
    }
    for (auto s : bottom.sources_of(i)) needed[s] = 1;
  }
  for (std::size_t s = 0; s < needed.size(); ++s) {
    if (!needed[s]) continue;
    const VertexId v = bottom.src_vertices[s];
    if (!cached.empty() && v < cached.size() && cached[v]) {
      ++t.cached_rows;
    } else {
      ++t.raw_rows;
    }
  }
  t.raw_feature_reals = t.raw_rows * feat_dim;
  t.hot_embedding_reals = t.moved_embeddings * emb_dim;
  t.backward_aux_reals = t.moved_embeddings * emb_dim;
  return t;
}

double layer_forward_ops(ModelKind kind, std::size_t edges, std::size_t dst, std::size_t fin, std::size_t fout) {
  const double agg = 2.0 * static_cast<double>(edges) * static_cast<double>(fin);
  const double mm = 2.0 * static_cast<double>(dst) * static_cast<double>(fin) * static_cast<double>(fout);
  return agg + (kind == ModelKind::kSage ? 2.0 * mm : mm);
}

std::uint64_t ModelShape::parameter_reals() const {
  std::uint64_t n = 0;
  const std::uint64_t mult = kind == ModelKind::kSage ? 2 : 1;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) n += mult * dims[l] * dims[l + 1];
  return n;
}

std::uint64_t ModelShape::bottom_parameter_reals() const {
  return (kind == ModelKind::kSage ? 2 : 1) * static_cast<std::uint64_t>(dims.at(0)) * dims.at(1);
}

BatchWork measure_batch(const SampledBlockStack& stack, std::span<const std::uint8_t> reused_rows,
                        std::span<const std::uint8_t> cached, const ModelShape& shape, Strategy strategy,
                        std::int64_t batch, std::int64_t super_batch, std::vector<std::uint8_t>* emb_resident) {
  if (shape.dims.size() != stack.blocks.size() + 1) throw ShapeError("measure_batch: model depth != stack depth");
  BatchWork w;
  w.batch = batch;
  w.super_batch = super_batch;
  const Block& bottom = stack.blocks[0];
  const bool cache = uses_feature_cache(strategy);
  w.transfer = account_transfer(bottom, reused_rows, cache ? cached : std::span<const std::uint8_t>{},
                                shape.feat_dim(), shape.emb_dim(), emb_resident);
  if (strategy == Strategy::kLayerBased) w.transfer.gradient_reals = shape.bottom_parameter_reals();
  w.gather_rows = static_cast<double>(w.transfer.raw_rows + w.transfer.cached_rows);
  w.cached_rows = static_cast<double>(w.transfer.cached_rows);

  double ops = 0;
  std::uint64_t act = 0;
  for (std::size_t l = 0; l < stack.blocks.size(); ++l) {
    const Block& b = stack.blocks[l];
    std::size_t edges = b.num_edges();
    std::size_t dst = b.num_dst();
    w.sample_edges += static_cast<double>(edges);
    if (l == 0 && !reused_rows.empty()) {
      for (std::size_t i = 0; i < b.num_dst(); ++i) {
        if (!reused_rows[i]) continue;
        edges -= b.sources_of(i).size();
        --dst;
      }
    }
    w.sample_edges_cold += static_cast<double>(l == 0 ? edges : b.num_edges());
    ops += layer_forward_ops(shape.kind, edges, dst, shape.dims[l], shape.dims[l + 1]);
    act += b.num_src() * shape.dims[l] + 3 * b.num_dst() * shape.dims[l + 1];
  }
  w.train_ops = 3.0 * ops;
  w.working_set_bytes = act * kRealSize;
  return w;
}

StagingWork measure_staging(const Block& one_hop, const ModelShape& shape, std::int64_t target_super_batch) {
  StagingWork s;
  s.super_batch = target_super_batch;
  s.vertices = static_cast<double>(one_hop.num_dst());
  s.sample_edges = static_cast<double>(one_hop.num_edges());
  s.gather_rows = static_cast<double>(one_hop.num_src());
  s.compute_ops = layer_forward_ops(shape.kind, one_hop.num_edges(), one_hop.num_dst(), shape.feat_dim(),
                                    shape.emb_dim());
  return s;
}

double staging_seconds(const StagingWork& w, const DeviceSet& d) {
  return w.sample_edges / d.slow.sample_rate + w.gather_rows / d.slow.gather_rate +
         w.compute_ops / d.slow.compute_rate;
}

namespace {

struct Builder {
  TaskGraph g;
  bool serialized = false;
  std::int64_t last = -1;

  TaskId add(std::string name, Resource r, std::uint32_t lane, WorkKind kind, double work, std::vector<TaskId> deps,
             const char* stage, std::int64_t batch, std::int64_t sb) {
    SimTask t;
    t.name = std::move(name);
    t.resource = r;
    t.lane = lane;
    t.kind = kind;
    t.work = work;
    t.deps = std::move(deps);
    if (serialized && last >= 0) t.deps.push_back(static_cast<TaskId>(last));
    std::sort(t.deps.begin(), t.deps.end());
    t.deps.erase(std::unique(t.deps.begin(), t.deps.end()), t.deps.end());
    t.stage = stage;
    t.batch = batch;
    t.super_batch = sb;
    t.mem_resource = r == Resource::kSlow ? Resource::kSlow : Resource::kFast;
    const TaskId id = g.add(std::move(t));
    last = static_cast<std::int64_t>(id);
    return id;
  }
};

std::string tag(const char* p, std::int64_t b) { return std::string(p) + std::to_string(b); }

}  // namespace

TaskGraph build_skeleton(std::span<const BatchWork> batches, std::span<const StagingWork> staging,
                         const SkeletonOptions& opts) {
  Builder B;
  B.serialized = !opts.pipelined;
  B.g.baseline_memory[static_cast<std::size_t>(Resource::kFast)] = opts.fast_resident_bytes;
  B.g.baseline_memory[static_cast<std::size_t>(Resource::kSlow)] = opts.slow_resident_bytes;
  const std::size_t nb = batches.size();
  const std::uint32_t depth = std::max<std::uint32_t>(1, opts.prefetch_depth);
  std::vector<TaskId> S(nb), C(nb), X(nb), T(nb), G(nb), P(nb);
  auto bound = [&](std::size_t b, std::vector<TaskId> deps) {
    if (b >= depth) deps.push_back(T[b - depth]);
    return deps;
  };
  auto train = [&](std::size_t b, std::vector<TaskId> deps) {
    if (b > 0) deps.push_back(T[b - 1]);
    const auto& w = batches[b];
    const TaskId id = B.add(tag("T", w.batch), Resource::kFast, 0, WorkKind::kCompute, w.train_ops, std::move(deps),
                            "train", w.batch, w.super_batch);
    B.g.tasks()[id].mem_alloc = w.working_set_bytes;
    B.g.tasks()[id].mem_free = w.working_set_bytes;
    return id;
  };
  auto bytes = [](const BatchWork& w) { return static_cast<double>(w.transfer.total_bytes() -
                                                                   w.transfer.gradient_reals * kRealSize); };

  switch (opts.strategy) {
    case Strategy::kCase1:
    case Strategy::kCase3:
      for (std::size_t b = 0; b < nb; ++b) {
        const auto& w = batches[b];
        std::vector<TaskId> sd;
        if (b > 0) sd.push_back(C[b - 1]);
        S[b] = B.add(tag("S", w.batch), Resource::kSlow, 0, WorkKind::kSample, w.sample_edges, bound(b, sd), "sample",
                     w.batch, w.super_batch);
        C[b] = B.add(tag("C", w.batch), Resource::kSlow, 0, WorkKind::kGather, w.gather_rows - w.cached_rows, {S[b]},
                     "gather", w.batch, w.super_batch);
        X[b] = B.add(tag("X", w.batch), Resource::kLink, 0, WorkKind::kTransfer, bytes(w), {C[b]}, "transfer", w.batch,
                     w.super_batch);
        std::vector<TaskId> td = {X[b]};
        if (opts.strategy == Strategy::kCase3) {
          G[b] = B.add(tag("G", w.batch), Resource::kFast, 1, WorkKind::kGather, w.cached_rows, {S[b]}, "cache",
                       w.batch, w.super_batch);
          td.push_back(G[b]);
        }
        T[b] = train(b, td);
      }
      break;
    case Strategy::kCase2:
    case Strategy::kCase4:
      for (std::size_t b = 0; b < nb; ++b) {
        const auto& w = batches[b];
        std::vector<TaskId> sd;
        if (b > 0) sd.push_back(opts.strategy == Strategy::kCase4 ? G[b - 1] : S[b - 1]);
        S[b] = B.add(tag("S", w.batch), Resource::kFast, 1, WorkKind::kSample, w.sample_edges, bound(b, sd), "sample",
                     w.batch, w.super_batch);
        std::vector<TaskId> td;
        if (opts.strategy == Strategy::kCase4) {
          G[b] = B.add(tag("G", w.batch), Resource::kFast, 1, WorkKind::kGather, w.cached_rows, {S[b]}, "cache",
                       w.batch, w.super_batch);
          td.push_back(G[b]);
        }
        std::vector<TaskId> cd = {S[b]};
        if (b > 0) cd.push_back(C[b - 1]);
        C[b] = B.add(tag("C", w.batch), Resource::kSlow, 0, WorkKind::kGather, w.gather_rows - w.cached_rows, cd,
                     "gather", w.batch, w.super_batch);
        X[b] = B.add(tag("X", w.batch), Resource::kLink, 0, WorkKind::kTransfer, bytes(w), {C[b]}, "transfer", w.batch,
                     w.super_batch);
        td.push_back(X[b]);
        T[b] = train(b, td);
      }
      break;
    case Strategy::kLayerBased: {
      const std::uint64_t n = std::max<std::uint64_t>(1, opts.n);
      std::vector<std::pair<std::size_t, std::size_t>> blocks;  // [lo, hi) per super-batch
      for (std::size_t lo = 0, hi = 0; lo < nb; lo = hi) {
        hi = lo;
        while (hi < nb && hi - lo < n && batches[hi].super_batch == batches[lo].super_batch) ++hi;
        blocks.emplace_back(lo, hi);
      }
      auto staging_for = [&](std::int64_t sb) -> const StagingWork* {
        for (const auto& s : staging) {
          if (s.super_batch == sb) return &s;
        }
        return nullptr;
      };
      // Stage 1 for a super-batch: n sampling rounds on the fast device, then
      // slow-role collection and raw transfer per batch.
      auto sample_block = [&](std::size_t k, std::vector<TaskId> after) {
        const auto [lo, hi] = blocks[k];
        for (std::size_t b = lo; b < hi; ++b) {
          const auto& w = batches[b];
          std::vector<TaskId> sd = b > lo ? std::vector<TaskId>{S[b - 1]} : after;
          S[b] = B.add(tag("S", w.batch), Resource::kFast, 0, WorkKind::kSample, w.sample_edges_cold, sd, "sample",
                       w.batch, w.super_batch);
        }
        for (std::size_t b = lo; b < hi; ++b) {
          const auto& w = batches[b];
          std::vector<TaskId> cd = {S[b]};
          if (b > 0) cd.push_back(C[b - 1]);
          C[b] = B.add(tag("C", w.batch), Resource::kSlow, 0, WorkKind::kGather, w.gather_rows - w.cached_rows, cd,
                       "gather", w.batch, w.super_batch);
          X[b] = B.add(tag("X", w.batch), Resource::kLink, 0, WorkKind::kTransfer,
                       static_cast<double>(w.transfer.raw_feature_reals * kRealSize), {C[b]}, "transfer", w.batch,
                       w.super_batch);
        }
      };
      // Super-batch k+1 is sampled before k trains so its hot queue is known
      // while Stage 2 runs alongside k's training.
      sample_block(0, {});
      std::int64_t ready = -1;  // Stage 2 completion for the super-batch about to train
      for (std::size_t k = 0; k < blocks.size(); ++k) {
        const auto [lo, hi] = blocks[k];
        const std::int64_t sb = batches[lo].super_batch;
        if (k + 1 < blocks.size()) {
          std::vector<TaskId> after = {S[hi - 1]};
          if (lo > 0) after.push_back(T[lo - 1]);
          sample_block(k + 1, after);
        }
        const TaskId sampled = k + 1 < blocks.size() ? S[blocks[k + 1].second - 1] : S[hi - 1];
        const StagingWork* next = staging_for(sb + 1);
        std::int64_t staged = -1;
        for (std::size_t b = lo; b < hi; ++b) {
          const auto& w = batches[b];
          std::vector<TaskId> td = {X[b], sampled};
          if (w.cached_rows > 0) {
            G[b] = B.add(tag("G", w.batch), Resource::kFast, 0, WorkKind::kGather, w.cached_rows, {S[hi - 1]}, "cache",
                         w.batch, w.super_batch);
            td.push_back(G[b]);
          }
          const auto emb = (w.transfer.hot_embedding_reals + w.transfer.backward_aux_reals) * kRealSize;
          if (emb > 0) {
            std::vector<TaskId> hd;
            if (ready >= 0) hd.push_back(static_cast<TaskId>(ready));
            td.push_back(B.add(tag("H", w.batch), Resource::kLink, 0, WorkKind::kTransfer, static_cast<double>(emb),
                               hd, "transfer", w.batch, w.super_batch));
          }
          // Stage 2 chunk j for the next super-batch uses the parameters of
          // version lo + j, i.e. waits for the sync after batch lo + j - 1.
          if (next != nullptr && next->vertices > 0 && k + 1 < blocks.size()) {
            const double frac = 1.0 / static_cast<double>(hi - lo);
            std::vector<TaskId> ed = {sampled};
            if (b > 0) ed.push_back(P[b - 1]);
            if (staged >= 0) ed.push_back(static_cast<TaskId>(staged));
            const std::string name = tag("E", sb + 1) + "." + std::to_string(b - lo);
            const auto s1 = B.add(name + ".sample", Resource::kSlow, 1, WorkKind::kSample, next->sample_edges * frac, ed,
                                  "stage2", w.batch, sb + 1);
            const auto s2 = B.add(name + ".gather", Resource::kSlow, 1, WorkKind::kGather, next->gather_rows * frac,
                                  {s1}, "stage2", w.batch, sb + 1);
            staged = B.add(name + ".compute", Resource::kSlow, 1, WorkKind::kCompute, next->compute_ops * frac, {s2},
                           "stage2", w.batch, sb + 1);
          }
          T[b] = train(b, td);
          P[b] = B.add(tag("P", w.batch), Resource::kLink, 0, WorkKind::kTransfer,
                       static_cast<double>(w.transfer.gradient_reals * kRealSize), {T[b]}, "sync", w.batch,
                       w.super_batch);
        }
        ready = staged;
      }
      break;
    }
  }
  return std::move(B.g);
}

DeviceSet calibrated_devices() {
  DeviceSet d;
  d.slow.compute_rate = 2.0e10;
  d.slow.sample_rate = 8.0e7;
  d.slow.gather_rate = 7.5e6;
  d.slow.memory_capacity = std::uint64_t{64} << 30;
  d.fast.compute_rate = 2.5e11;
  d.fast.sample_rate = 2.4e8;
  d.fast.gather_rate = 2.0e8;
  d.fast.memory_capacity = std::uint64_t{16} << 30;
  d.link.bandwidth = 1.2e10;
  d.link.latency = 1.0e-5;
  return d;
}

}  // namespace hetgnn
