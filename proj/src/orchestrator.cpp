#include "hetgnn/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <set>

#include "trainer.hpp"

namespace hetgnn {
namespace detail {

DenseMatrix gather_rows(const DenseMatrix& features, std::span<const VertexId> vertices,
                        const std::vector<std::uint8_t>* needed) {
  DenseMatrix out(vertices.size(), features.cols());
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (needed != nullptr && !(*needed)[i]) continue;
    const auto src = features.row(vertices[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

void stage_chunk(const Dataset& ds, const TrainConfig& cfg, const LayerParams& bottom, std::uint64_t version,
                 const StagingPlan& plan, std::size_t j, EmbeddingStore& store) {
  const auto chunk = plan.chunk(j);
  if (chunk.empty()) return;
  const Block block = sample_one_hop_hot(ds.graph, chunk, cfg.fanouts[0],
                                         derive_seed(cfg.seed, {kStageSampleKey, plan.target_super_batch}));
  const DenseMatrix inputs = gather_rows(ds.data.features, block.src_vertices);
  const DenseMatrix out = bottom_layer_forward(cfg.model, bottom, cfg.layers() > 1, block, inputs);
  for (std::size_t i = 0; i < block.num_dst(); ++i) {
    store.put(block.dst_vertices[i], out.row(i), version, plan.target_super_batch);
  }
}

Trainer::Trainer(const Dataset& ds, const TrainConfig& cfg, EmbeddingStore& store)
    : ds_(ds), cfg_(cfg), store_(store) {
  params_ = ModelParams::init(cfg.model, cfg.dims(ds.data.feat_dim(), static_cast<std::size_t>(ds.data.num_classes)),
                              derive_seed(cfg.seed, {kInitKey}));
}

BatchRecord Trainer::train(const PlannedBatch& pb) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& stack = pb.stack;
  const Block& bottom = stack.blocks[0];
  BatchRecord rec;
  rec.batch = pb.global;
  rec.epoch = pb.epoch;
  rec.super_batch = pb.super_batch;
  rec.num_seeds = pb.seeds.size();
  batch_gap_ = 0;

  std::vector<std::uint8_t> hit(bottom.num_dst(), 0);
  DenseMatrix values;
  if (pb.hot_rows > 0) {
    values = DenseMatrix(bottom.num_dst(), store_.emb_dim());
    for (std::size_t i = 0; i < bottom.num_dst(); ++i) {
      if (!stack.hot_flags[i]) continue;
      ++rec.hot_rows;
      if (store_.get_into(bottom.dst_vertices[i], pb.global, values.row(i))) {
        hit[i] = 1;
        ++rec.reused_rows;
      }
    }
  }
  if (hit != pb.reused) {
    throw ContractViolation("batch " + std::to_string(pb.global) + ": store hits differ from the staging plan");
  }
  rec.fallback_rows = rec.hot_rows - rec.reused_rows;

  // Raw rows are only needed by dst rows computed from features.
  std::vector<std::uint8_t> needed(bottom.num_src(), 0);
  for (std::size_t i = 0; i < bottom.num_dst(); ++i) {
    if (hit[i]) continue;
    for (auto s : bottom.sources_of(i)) needed[s] = 1;
  }
  const DenseMatrix inputs = gather_rows(ds_.data.features, bottom.src_vertices, &needed);
  BottomOverride ov;
  if (rec.reused_rows > 0) ov = BottomOverride{&hit, &values};
  const auto fwd = forward_batch(stack, inputs, params_, ov);

  std::vector<std::int32_t> labels(pb.seeds.size());
  for (std::size_t i = 0; i < pb.seeds.size(); ++i) labels[i] = ds_.data.labels[pb.seeds[i]];
  const auto lr = loss_and_grad(fwd.logits, labels);
  const auto grads = backward_batch(fwd, lr.dlogits, params_);
  const ModelParams before = params_;
  if (cfg_.optimizer == OptimizerKind::kAdam) {
    adam_step(params_, grads, cfg_.lr, adam_);
  } else {
    sgd_step(params_, grads, cfg_.lr);
  }
  rec.loss = lr.loss;
  rec.correct = lr.correct;
  rec.max_weight_change = max_weight_change(before, params_);
  rec.transfer = pb.work.transfer;
  rec.max_gap = batch_gap_;
  const double dt = seconds_since(t0);
  wall_train += dt;
  cur_.wall_train += dt;
  return rec;
}

std::optional<EpochReport> Trainer::account(const PlannedBatch& pb, const BatchRecord& rec) {
  cur_.epoch = pb.epoch;
  cur_.mean_loss += rec.loss;
  cur_.transfer += rec.transfer;
  cur_.reuse_hits += rec.reused_rows;
  cur_.fallbacks += rec.fallback_rows;
  cur_.cache_hits += rec.transfer.cached_rows;
  ++cur_batches_;
  cur_seeds_ += rec.num_seeds;
  cur_correct_ += rec.correct;
  if (!pb.last_of_epoch) return std::nullopt;

  EpochReport r = cur_;
  r.mean_loss /= static_cast<Real>(cur_batches_);
  r.train_accuracy = cur_seeds_ > 0 ? static_cast<double>(cur_correct_) / static_cast<double>(cur_seeds_) : 0.0;
  if (cfg_.evaluate) {
    const auto eval_seed = derive_seed(cfg_.seed, {kEvalKey});
    const auto val = ds_.data.val_vertices();
    const auto test = ds_.data.test_vertices();
    r.val_accuracy = evaluate_accuracy(ds_, params_, cfg_.fanouts, val, cfg_.batch_size, eval_seed);
    r.test_accuracy = evaluate_accuracy(ds_, params_, cfg_.fanouts, test, cfg_.batch_size, eval_seed);
  }
  cur_ = EpochReport{};
  cur_batches_ = cur_seeds_ = cur_correct_ = 0;
  return r;
}

void check_fallback(const SuperBatchPlan& sp, const TrainConfig& cfg) {
  if (sp.index == 0) return;  // warm-up: nothing staged yet
  std::size_t hot = 0, reused = 0;
  for (const auto& pb : sp.batches) {
    hot += pb.hot_rows;
    reused += static_cast<std::size_t>(std::count(pb.reused.begin(), pb.reused.end(), std::uint8_t{1}));
  }
  if (hot == 0) return;
  const double frac = static_cast<double>(hot - reused) / static_cast<double>(hot);
  if (frac > cfg.fallback_limit) {
    throw ConfigError("super-batch " + std::to_string(sp.index) + ": " + std::to_string(hot - reused) + " of " +
                      std::to_string(hot) + " hot rows missed staging (fallback " + std::to_string(frac) +
                      " > limit " + std::to_string(cfg.fallback_limit) +
                      "); lower hot_ratio or use staging_capacity=unbounded");
  }
}

void run_serial(const Dataset& ds, const TrainConfig& cfg, const RunHooks& hooks, RunPlanner& planner,
                Trainer& trainer, EmbeddingStore& store, RunSink& sink) {
  const std::uint64_t n = cfg.super_batch_n;
  while (!planner.done()) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto sp = planner.next();
    sink.wall_sample += seconds_since(t0);
    check_fallback(sp, cfg);
    sink.on_plan(sp);
    auto stage = [&](std::size_t j) {
      const auto t1 = std::chrono::steady_clock::now();
      const std::uint64_t version = sp.index * n + j;
      if (trainer.params().version != version) throw ContractViolation("serial stage-2 version mismatch");
      if (hooks.on_stage) hooks.on_stage(version, sp.index + 1, trainer.params().version);
      stage_chunk(ds, cfg, trainer.params().layers[0], version, *sp.next, j, store);
      sink.wall_stage2 += seconds_since(t1);
    };
    for (std::size_t j = 0; j < sp.batches.size(); ++j) {
      if (sp.next) stage(j);
      const auto rec = trainer.train(sp.batches[j]);
      sink.on_batch(sp.batches[j], rec);
    }
    if (!planner.done()) store.advance_super_batch();
  }
}

}  // namespace detail

std::vector<double> epsilon_trace(const std::vector<Real>& max_changes, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("epsilon_trace: n must be >= 1");
  std::vector<double> eps;
  for (std::size_t lo = 0; lo < max_changes.size(); lo += n) {
    const std::size_t hi = std::min<std::size_t>(max_changes.size(), lo + n);
    Real m = 0;
    for (std::size_t i = lo; i < hi; ++i) m = std::max(m, max_changes[i]);
    eps.push_back(static_cast<double>(m) * 2.0 * static_cast<double>(n));
  }
  return eps;
}

double evaluate_accuracy(const Dataset& ds, const ModelParams& params, const Fanouts& fanouts,
                         std::span<const VertexId> vertices, std::size_t batch_size, std::uint64_t seed) {
  if (vertices.empty()) return 0.0;
  // Shuffled like training batches: GCN block normalisation depends on batch
  // composition, so id-ordered batches would be biased.
  const auto batches = make_batches(vertices, batch_size, derive_seed(seed, {0x5EED}));
  std::size_t correct = 0;
  for (std::size_t b = 0; b < batches.size(); ++b) {
    const auto& seeds = batches[b];
    const auto stack = sample_khop(ds.graph, seeds, fanouts, derive_seed(seed, {b}));
    const auto inputs = detail::gather_rows(ds.data.features, stack.blocks[0].src_vertices);
    const auto fwd = forward_batch(stack, inputs, params);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const auto row = fwd.logits.row(i);
      const auto best = static_cast<std::int32_t>(std::max_element(row.begin(), row.end()) - row.begin());
      if (best == ds.data.labels[seeds[i]]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(vertices.size());
}

namespace {

SimSummary simulate_slice(const WorkloadPlan& base, const TrainConfig& cfg, std::vector<BatchWork> batches,
                          std::vector<StagingWork> staging) {
  WorkloadPlan wp;
  wp.batches = std::move(batches);
  wp.staging = std::move(staging);
  wp.fast_resident = base.fast_resident;
  wp.slow_resident = base.slow_resident;
  return summarize(simulate(skeleton_for(wp, cfg), cfg.devices));
}

}  // namespace

RunReport run_training(const Dataset& ds, const TrainConfig& cfg, const RunHooks& hooks) {
  cfg.validate();
  ds.data.validate(ds.graph.num_vertices());
  const HotPlacement placement = make_placement(ds, cfg);

  WorkloadPlan totals;
  totals.fast_resident = fast_resident_bytes(ds, cfg, placement);
  totals.slow_resident = slow_resident_bytes(ds);
  if (totals.fast_resident > cfg.devices.fast.memory_capacity) {
    throw SimulatedOom("<resident>", "fast", "setup", totals.fast_resident, cfg.devices.fast.memory_capacity);
  }
  if (totals.slow_resident > cfg.devices.slow.memory_capacity) {
    throw SimulatedOom("<resident>", "slow", "setup", totals.slow_resident, cfg.devices.slow.memory_capacity);
  }

  RunReport rep;
  rep.dataset = ds.name;
  rep.fingerprint = fingerprint(ds);
  rep.config = cfg;
  rep.partition = placement.partition;
  rep.cache_rows = placement.cache.vertices.size();

  const std::size_t emb = cfg.dims(ds.data.feat_dim(), static_cast<std::size_t>(ds.data.num_classes))[1];
  EmbeddingStore store(cfg.super_batch_n, emb);
  detail::Trainer trainer(ds, cfg, store);
  store.set_reuse_observer([&](const ReuseEvent& e) {
    trainer.note_gap(e.reading_batch - e.version);
    if (hooks.on_reuse) hooks.on_reuse(e);
  });
  RunPlanner planner(ds, cfg, placement);

  std::vector<Real> changes;
  detail::RunSink sink;
  sink.on_batch = [&](const PlannedBatch& pb, const BatchRecord& rec) {
    rep.batches.push_back(rec);
    changes.push_back(rec.max_weight_change);
    totals.batches.push_back(pb.work);
    if (auto er = trainer.account(pb, rec)) rep.epochs.push_back(*er);
  };
  sink.on_plan = [&](const SuperBatchPlan& sp) {
    if (!sp.next) return;
    rep.staged_vertices += sp.next->queue.size();
    totals.staging.push_back(sp.next->work);
    rep.staging.push_back(*sp.next);
  };

  const bool stages = cfg.strategy == Strategy::kLayerBased && !placement.partition.cpu_compute.empty();
  if (cfg.pipelined) {
    detail::run_pipelined(ds, cfg, hooks, planner, trainer, store, sink, stages);
  } else {
    detail::run_serial(ds, cfg, hooks, planner, trainer, store, sink);
  }

  rep.final_params = trainer.params();
  rep.epsilon = epsilon_trace(changes, cfg.super_batch_n);
  rep.max_gap = store.max_gap();
  rep.wall_sample = sink.wall_sample;
  rep.wall_stage2 = sink.wall_stage2;
  rep.wall_train = trainer.wall_train;

  rep.sim = summarize(simulate(skeleton_for(totals, cfg), cfg.devices));
  for (auto& er : rep.epochs) {
    std::vector<BatchWork> bw;
    std::set<std::int64_t> sbs;
    for (std::size_t i = 0; i < rep.batches.size(); ++i) {
      if (rep.batches[i].epoch != er.epoch) continue;
      bw.push_back(totals.batches[i]);
      sbs.insert(totals.batches[i].super_batch);
    }
    std::vector<StagingWork> sw;
    for (const auto& s : totals.staging) {
      if (sbs.count(s.super_batch) != 0) sw.push_back(s);
    }
    er.sim = simulate_slice(totals, cfg, std::move(bw), std::move(sw));
  }
  return rep;
}

}  // namespace hetgnn
