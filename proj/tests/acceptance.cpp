// Runs the acceptance criteria and prints one PASS/FAIL line per criterion.
//
//   hetgnn_acceptance [--only K] [--known-failure K ...]
//
// Exit status is 1 if any criterion fails, except those listed with
// --known-failure, which still print FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "wide_frontier_fixture.hpp"
#include "hetgnn/cache_compare.hpp"
#include "hetgnn/config.hpp"
#include "hetgnn/datasets.hpp"
#include "hetgnn/hotness.hpp"
#include "hetgnn/model.hpp"
#include "hetgnn/orchestrator.hpp"
#include "hetgnn/report.hpp"
#include "hetgnn/rng.hpp"
#include "hetgnn/workload.hpp"
#include "hotness_oracle.hpp"
#include "test_util.hpp"

using namespace hetgnn;

namespace {

const std::filesystem::path kRoot = HETGNN_SOURCE_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

char buf[512];

template <typename... A>
std::string fmt(const char* f, A... a) {
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

const Dataset& sbm() {
  static const Dataset ds = make_dataset("sbm1k");
  return ds;
}

TrainConfig sbm_config() { return load_run_spec(kRoot / "configs" / "sbm1k_train.json").train; }

Outcome staleness_fuzz() {
  // Small model so a thousand threaded runs fit the time budget; the schedule
  // is what is being fuzzed, not the numerics.
  TrainConfig base;
  base.fanouts = {3, 3};
  base.batch_size = 32;
  base.hidden_dim = 8;
  base.epochs = 1;
  base.hot_ratio = 0.3;
  base.evaluate = false;
  base.pipelined = true;
  const std::uint64_t ns[] = {1, 2, 4, 8};
  const int runs = 1000;
  std::uint64_t reuses = 0, violations = 0;
  for (int i = 0; i < runs; ++i) {
    auto c = base;
    c.super_batch_n = ns[i % 4];
    c.seed = 1 + static_cast<std::uint64_t>(i / 4);
    const std::uint64_t n = c.super_batch_n;
    std::mutex mu;
    RunHooks h;
    h.jitter_seed = 1000 + static_cast<std::uint64_t>(i);
    h.on_reuse = [&](const ReuseEvent& e) {
      std::lock_guard lk(mu);
      ++reuses;
      const bool ok = e.version <= e.reading_batch && e.reading_batch - e.version <= 2 * n - 1 &&
                      e.super_batch == e.reading_batch / n && e.version / n + 1 == e.super_batch;
      if (!ok) ++violations;
    };
    try {
      const auto r = run_training(sbm(), c, h);
      if (r.max_gap > 2 * n - 1) ++violations;
    } catch (const StalenessViolation&) {
      ++violations;
    }
  }
  return {violations == 0 && reuses > 0,
          fmt("%d runs, %llu reuses, %llu violations", runs, static_cast<unsigned long long>(reuses),
              static_cast<unsigned long long>(violations))};
}

Outcome exact_mode() {
  auto lb = sbm_config();
  lb.epochs = 5;
  lb.hot_ratio = 0;
  lb.strategy = Strategy::kLayerBased;
  auto c1 = lb;
  c1.strategy = Strategy::kCase1;
  const auto a = run_training(sbm(), lb).losses();
  const auto b = run_training(sbm(), c1).losses();
  std::size_t diff = 0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) diff += a[i] != b[i];
  return {a.size() == b.size() && diff == 0 && !a.empty(),
          fmt("%zu batches, %zu differing losses", a.size(), diff)};
}

Outcome convergence() {
  double exact = 0, stale = 0;
  const std::uint64_t seeds[] = {1, 2, 3};
  for (std::uint64_t s : seeds) {
    auto lb = sbm_config();
    lb.seed = s;
    lb.strategy = Strategy::kLayerBased;
    auto c1 = lb;
    c1.strategy = Strategy::kCase1;
    c1.hot_ratio = 0;
    exact += run_training(sbm(), c1).epochs.back().test_accuracy / 3;
    stale += run_training(sbm(), lb).epochs.back().test_accuracy / 3;
  }
  const double pp = 100 * (stale - exact);
  return {std::abs(pp) <= 1.0, fmt("exact %.4f, layer-based %.4f, diff %+.2f pp (tol 1.00)", exact, stale, pp)};
}

Outcome gradients() {
  double worst = 0;
  int checks = 0;
  for (ModelKind kind : {ModelKind::kGcn, ModelKind::kSage}) {
    for (std::size_t layers = 1; layers <= 3; ++layers) {
      for (bool with_hot : {false, true}) {
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
          const auto ds = power_law_fixture(60, seed);
          const std::vector<VertexId> seeds = {1, 5, 9, 13, 20};
          std::vector<std::uint8_t> hot(60, 0);
          for (VertexId v = 0; v < 60; v += 3) hot[v] = 1;
          const auto stack = sample_khop_skip_hot(ds.graph, seeds, Fanouts(layers, 2), hot, seed);
          Rng rng(seed + 100);
          DenseMatrix inputs(stack.blocks[0].num_src(), 4);
          for (auto& x : inputs.data()) x = rng.normal();
          std::vector<std::int32_t> labels;
          for (std::size_t i = 0; i < seeds.size(); ++i) labels.push_back(static_cast<std::int32_t>(i % 3));
          std::vector<std::size_t> dims = {4};
          for (std::size_t l = 0; l + 1 < layers; ++l) dims.push_back(5);
          dims.push_back(3);
          const auto params = ModelParams::init(kind, dims, seed);
          BottomOverride ov;
          DenseMatrix hist;
          if (with_hot) {
            if (stack.num_hot() == 0) return {false, "hot-constant fixture has no hot rows"};
            hist = DenseMatrix(stack.blocks[0].num_dst(), dims[1]);
            for (auto& x : hist.data()) x = rng.normal();
            ov.rows = &stack.hot_flags;
            ov.values = &hist;
          }
          worst = std::max(worst, static_cast<double>(grad_check(stack, inputs, labels, params, 1e-5, ov)));
          ++checks;
        }
      }
    }
  }
  return {worst < 1e-4, fmt("%d checks, max rel err %.2e (tol 1e-4)", checks, worst)};
}

Outcome wide_frontier() {
  const auto stack = wide_frontier_stack();
  const ModelShape shape{ModelKind::kGcn, {602, 256, 41}};
  const auto raw = measure_batch(stack, {}, {}, shape, Strategy::kCase1, 0, 0).transfer;
  const std::vector<std::uint8_t> all(stack.blocks[0].num_dst(), 1);
  const auto split = measure_batch(stack, all, {}, shape, Strategy::kLayerBased, 0, 0).transfer;
  const auto split_reals = split.hot_embedding_reals + split.backward_aux_reals;
  const bool ok = raw.raw_feature_reals == 86175ull * 602 && split.raw_feature_reals == 0 &&
                  split_reals == 2ull * 28706 * 256;
  return {ok, fmt("raw %llu reals, layer split %llu reals", static_cast<unsigned long long>(raw.raw_feature_reals),
                  static_cast<unsigned long long>(split_reals))};
}

struct Shipped {
  RunSpec spec;
  Dataset ds;
  TrainConfig cfg;
};

const Shipped& shipped() {
  static const Shipped s = [] {
    Shipped x;
    x.spec = load_run_spec(kRoot / "configs" / "pl10k_simulate.json");
    x.ds = make_dataset(x.spec.dataset);
    x.cfg = x.spec.resolved(x.ds);
    return x;
  }();
  return s;
}

Outcome pipeline_benefit() {
  const auto& s = shipped();
  double case1_reduction = 0;
  Strategy best = Strategy::kCase1;
  double best_m = 1e300;
  std::string detail;
  for (Strategy st : kAllStrategies) {
    const auto r = simulate_strategy(s.ds, s.cfg, st);
    if (st == Strategy::kCase1) case1_reduction = 1 - r.pipelined.makespan / r.serialized.makespan;
    if (r.pipelined.makespan < best_m) {
      best_m = r.pipelined.makespan;
      best = st;
    }
    detail += fmt("%s %.4f s, ", to_string(st).c_str(), r.pipelined.makespan);
  }
  detail += fmt("case1 pipelining -%.1f%% (tol 40%%)", 100 * case1_reduction);
  return {case1_reduction >= 0.40 && best == Strategy::kLayerBased, detail};
}

Outcome cache_policies() {
  const auto& s = shipped();
  const auto pts = compare_cache(s.ds, s.cfg, s.spec.budget_fractions);
  auto bytes = [&](double f, CachePolicy p) {
    for (const auto& x : pts) {
      if (x.budget_fraction == f && x.policy == p) return x.data_bytes;
    }
    return std::uint64_t{0};
  };
  bool ok = true;
  std::string bad;
  for (double f : s.spec.budget_fractions) {
    const auto h = bytes(f, CachePolicy::kHybrid);
    const auto d = bytes(f, CachePolicy::kDegree);
    const auto p = bytes(f, CachePolicy::kPreSample);
    if (h > d || h > p) {
      ok = false;
      bad += fmt(", at %.0f%% hybrid %.3g B > min(degree %.3g B, presample %.3g B)", 100 * f, double(h),
                 double(d), double(p));
    }
  }
  return {ok, fmt("%zu budgets", s.spec.budget_fractions.size()) + (ok ? std::string(", hybrid never worse") : bad)};
}

Outcome hotness_fidelity() {
  const auto ds = power_law_fixture();
  const auto train = ds.data.train_vertices();
  const Fanouts f = {5, 5, 5};
  const auto t = estimate_hotness(ds.graph, train, f, 20, 3, 64);
  const auto oracle = replay_counts(ds.graph, train, f, 200, 64, 12345);
  std::vector<VertexId> idx(ds.graph.num_vertices());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](VertexId a, VertexId b) { return oracle[a] > oracle[b]; });
  idx.resize(idx.size() / 5);
  std::vector<double> est, ref;
  for (VertexId v : idx) {
    est.push_back(static_cast<double>(t.counts[v]));
    ref.push_back(oracle[v]);
  }
  const double rho = spearman(est, ref);
  return {rho > 0.95, fmt("spearman %.4f over %zu vertices (tol 0.95)", rho, idx.size())};
}

Outcome schedule_independence() {
  auto c = sbm_config();
  c.strategy = Strategy::kLayerBased;
  const auto serial = run_training(sbm(), c);
  c.pipelined = true;
  RunHooks h;
  h.jitter_seed = 42;
  const auto piped = run_training(sbm(), c, h);
  const auto a = serial.losses(), b = piped.losses();
  std::size_t diff = a.size() == b.size() ? 0 : a.size();
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) diff += a[i] != b[i];
  return {diff == 0 && !a.empty(), fmt("%zu batches, %zu differing losses", a.size(), diff)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> known, only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if ((a == "--known-failure" || a == "--only") && i + 1 < argc) {
      (a == "--only" ? only : known).insert(std::stoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--only K] [--known-failure K ...]\n", argv[0]);
      return 2;
    }
  }
  const std::vector<Criterion> all = {
      {1, "staleness bound", 120, staleness_fuzz},
      {2, "exact-mode equivalence", 60, exact_mode},
      {3, "convergence under staleness", 300, convergence},
      {4, "gradient correctness", 60, gradients},
      {5, "transfer accounting", 10, wide_frontier},
      {6, "pipeline benefit", 60, pipeline_benefit},
      {7, "cache-policy comparison", 120, cache_policies},
      {8, "hotness fidelity", 120, hotness_fidelity},
      {9, "schedule independence", 120, schedule_independence},
  };
  int failed = 0, tolerated = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_seconds;
    const bool pass = o.pass && in_time;
    std::printf("%s %d %s: %s; %.1f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                secs, c.budget_seconds, !pass && known.count(c.id) ? " [known failure]" : "");
    std::fflush(stdout);
    if (!pass) (known.count(c.id) ? tolerated : failed)++;
  }
  std::printf("%d failed, %d known failures\n", failed, tolerated);
  return failed == 0 ? 0 : 1;
}
