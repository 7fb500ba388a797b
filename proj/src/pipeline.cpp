#include "hetgnn/pipeline.hpp"

#include <memory>
#include <thread>

#include "hetgnn/spsc_queue.hpp"
#include "trainer.hpp"

namespace hetgnn {

void VersionSignal::set(std::uint64_t v) {
  {
    std::lock_guard lk(mu_);
    value_ = std::max(value_, v);
  }
  cv_.notify_all();
}

void VersionSignal::wait_at_least(std::uint64_t v) {
  std::unique_lock lk(mu_);
  cv_.wait(lk, [&] { return value_ >= v || aborted_; });
  if (value_ < v) throw PipelineAborted();
}

std::uint64_t VersionSignal::value() const {
  std::lock_guard lk(mu_);
  return value_;
}

void VersionSignal::abort() {
  {
    std::lock_guard lk(mu_);
    aborted_ = true;
  }
  cv_.notify_all();
}

void ParamSnapshotBoard::publish(std::uint64_t version, const LayerParams& bottom) {
  {
    std::lock_guard lk(mu_);
    snapshots_[version] = bottom;
    latest_.store(std::max(latest_.load(), version));
  }
  cv_.notify_all();
}

LayerParams ParamSnapshotBoard::take(std::uint64_t version) {
  std::unique_lock lk(mu_);
  cv_.wait(lk, [&] { return snapshots_.count(version) != 0 || aborted_; });
  const auto it = snapshots_.find(version);
  if (it == snapshots_.end()) throw PipelineAborted();
  LayerParams out = it->second;
  snapshots_.erase(snapshots_.begin(), snapshots_.find(version));
  return out;
}

std::size_t ParamSnapshotBoard::retained() const {
  std::lock_guard lk(mu_);
  return snapshots_.size();
}

void ParamSnapshotBoard::abort() {
  {
    std::lock_guard lk(mu_);
    aborted_ = true;
  }
  cv_.notify_all();
}

namespace detail {
namespace {

// Random yields and short sleeps to shake out interleavings in tests.
class Jitter {
 public:
  Jitter(std::uint64_t seed, std::uint64_t role) : on_(seed != 0), rng_(derive_seed(seed, {role})) {}
  void operator()() {
    if (!on_) return;
    switch (rng_.below(6)) {
      case 0:
        std::this_thread::yield();
        break;
      case 1:
        std::this_thread::sleep_for(std::chrono::microseconds(rng_.below(40)));
        break;
      default:
        break;
    }
  }

 private:
  bool on_;
  Rng rng_;
};

}  // namespace

void run_pipelined(const Dataset& ds, const TrainConfig& cfg, const RunHooks& hooks, RunPlanner& planner,
                   Trainer& trainer, EmbeddingStore& store, RunSink& sink, bool stages) {
  using Item = std::shared_ptr<const SuperBatchPlan>;
  const std::uint64_t n = cfg.super_batch_n;
  const std::uint64_t num_sb = planner.num_super_batches();
  SpscQueue<Item> to_fast(cfg.prefetch_depth);
  SpscQueue<Item> to_slow(cfg.prefetch_depth);
  ParamSnapshotBoard board;
  VersionSignal staged;    // highest target super-batch whose Stage 2 finished
  VersionSignal advanced;  // store's current super-batch
  std::mutex err_mu;
  std::exception_ptr err;
  auto fail = [&](std::exception_ptr e) {
    {
      std::lock_guard lk(err_mu);
      if (!err) err = e;
    }
    to_fast.close();
    to_slow.close();
    board.abort();
    staged.abort();
    advanced.abort();
  };

  std::thread fast([&] {
    try {
      Jitter jitter(hooks.jitter_seed, 1);
      if (stages) board.publish(0, trainer.params().layers[0]);
      while (auto item = to_fast.pop()) {
        const SuperBatchPlan& sp = **item;
        for (const auto& pb : sp.batches) {
          jitter();
          const auto rec = trainer.train(pb);
          if (stages) board.publish(trainer.params().version, trainer.params().layers[0]);
          sink.on_batch(pb, rec);
        }
        if (sp.next) staged.wait_at_least(sp.index + 1);
        if (sp.index + 1 < num_sb) {
          jitter();
          store.advance_super_batch();
          advanced.set(sp.index + 1);
        }
      }
    } catch (...) {
      fail(std::current_exception());
    }
  });

  std::thread slow([&] {
    try {
      Jitter jitter(hooks.jitter_seed, 2);
      while (auto item = to_slow.pop()) {
        const SuperBatchPlan& sp = **item;
        advanced.wait_at_least(sp.index);
        for (std::size_t j = 0; j < n; ++j) {
          const std::uint64_t version = sp.index * n + j;
          const LayerParams bottom = board.take(version);
          jitter();
          const auto t0 = std::chrono::steady_clock::now();
          if (hooks.on_stage) hooks.on_stage(version, sp.index + 1, board.latest());
          stage_chunk(ds, cfg, bottom, version, *sp.next, j, store);
          sink.wall_stage2 += seconds_since(t0);
        }
        staged.set(sp.index + 1);
      }
    } catch (...) {
      fail(std::current_exception());
    }
  });

  try {
    while (!planner.done()) {
      const auto t0 = std::chrono::steady_clock::now();
      auto sp = std::make_shared<const SuperBatchPlan>(planner.next());
      sink.wall_sample += seconds_since(t0);
      check_fallback(*sp, cfg);
      sink.on_plan(*sp);
      if (sp->next && !to_slow.push(sp)) break;
      if (!to_fast.push(sp)) break;
    }
  } catch (...) {
    fail(std::current_exception());
  }
  to_fast.close();
  to_slow.close();
  fast.join();
  slow.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace detail
}  // namespace hetgnn
