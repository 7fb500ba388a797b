#include <gtest/gtest.h>

#include <map>
#include <random>

#include "hetgnn/device_sim.hpp"
#include "hetgnn/workload.hpp"

using namespace hetgnn;

namespace {

DeviceSet unit_devices() {
  DeviceSet d;
  d.slow = {100, 100, 100, 1 << 20};
  d.fast = {100, 100, 100, 1 << 20};
  d.link = {100, 0};
  return d;
}

SimTask task(Resource r, WorkKind k, double work, std::vector<TaskId> deps = {}, std::uint32_t lane = 0) {
  SimTask t;
  t.name = "t";
  t.resource = r;
  t.kind = k;
  t.work = work;
  t.deps = std::move(deps);
  t.lane = lane;
  return t;
}

}  // namespace

TEST(DeviceSim, SingleTask) {
  TaskGraph g;
  g.add(task(Resource::kFast, WorkKind::kCompute, 100));
  const auto r = simulate(g, unit_devices());
  EXPECT_DOUBLE_EQ(r.makespan, 1.0);
  EXPECT_DOUBLE_EQ(r.util(Resource::kFast), 1.0);
  EXPECT_DOUBLE_EQ(r.util(Resource::kSlow), 0.0);
}

TEST(DeviceSim, IndependentTasksOnTwoRolesOverlap) {
  TaskGraph g;
  g.add(task(Resource::kFast, WorkKind::kCompute, 100));
  g.add(task(Resource::kSlow, WorkKind::kCompute, 100));
  const auto r = simulate(g, unit_devices());
  EXPECT_DOUBLE_EQ(r.makespan, 1.0);
  EXPECT_DOUBLE_EQ(r.util(Resource::kFast), 1.0);
  EXPECT_DOUBLE_EQ(r.util(Resource::kSlow), 1.0);
}

TEST(DeviceSim, DependencyChainSerializes) {
  TaskGraph g;
  const auto a = g.add(task(Resource::kSlow, WorkKind::kSample, 100));
  const auto b = g.add(task(Resource::kLink, WorkKind::kTransfer, 200, {a}));
  g.add(task(Resource::kFast, WorkKind::kCompute, 50, {b}));
  const auto r = simulate(g, unit_devices());
  EXPECT_DOUBLE_EQ(r.makespan, 3.5);
  EXPECT_DOUBLE_EQ(r.critical_path, 3.5);
  EXPECT_DOUBLE_EQ(r.events[1].start, 1.0);
  EXPECT_DOUBLE_EQ(r.events[2].start, 3.0);
}

TEST(DeviceSim, LinkLatencyAddsPerTransfer) {
  auto d = unit_devices();
  d.link.latency = 0.25;
  TaskGraph g;
  g.add(task(Resource::kLink, WorkKind::kTransfer, 100));
  EXPECT_DOUBLE_EQ(simulate(g, d).makespan, 1.25);
}

TEST(DeviceSim, ContentionSharesRate) {
  EXPECT_EQ(contention_shares({1.0}), (std::vector<double>{1.0}));
  EXPECT_EQ(contention_shares({1.0, 1.0}), (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(contention_shares({3.0, 1.0}), (std::vector<double>{0.75, 0.25}));
}

TEST(DeviceSim, TwoCoResidentTasksConserveWork) {
  TaskGraph g;
  g.add(task(Resource::kFast, WorkKind::kCompute, 100, {}, 0));
  g.add(task(Resource::kFast, WorkKind::kCompute, 100, {}, 1));
  const auto r = simulate(g, unit_devices());
  EXPECT_DOUBLE_EQ(r.events[0].end, 2.0);
  EXPECT_DOUBLE_EQ(r.events[1].end, 2.0);
  EXPECT_DOUBLE_EQ(r.makespan, 2.0);
}

TEST(DeviceSim, UnequalCoResidentTasks) {
  // Both at half rate until the short one ends at t=1 (50 units each), then
  // the long one finishes its remaining 100 alone.
  TaskGraph g;
  g.add(task(Resource::kFast, WorkKind::kCompute, 50, {}, 0));
  g.add(task(Resource::kFast, WorkKind::kCompute, 150, {}, 1));
  const auto r = simulate(g, unit_devices());
  EXPECT_DOUBLE_EQ(r.events[0].end, 1.0);
  EXPECT_DOUBLE_EQ(r.events[1].end, 2.0);
}

TEST(DeviceSim, SameLaneIsFifoByReadyTime) {
  TaskGraph g;
  const auto a = g.add(task(Resource::kSlow, WorkKind::kCompute, 100));
  g.add(task(Resource::kFast, WorkKind::kCompute, 50, {a}));
  g.add(task(Resource::kFast, WorkKind::kCompute, 50));
  const auto r = simulate(g, unit_devices());
  EXPECT_DOUBLE_EQ(r.events[2].start, 0.0);
  EXPECT_DOUBLE_EQ(r.events[1].start, 1.0);
  EXPECT_DOUBLE_EQ(r.makespan, 1.5);
}

TEST(DeviceSim, OomNamesFirstViolatingTask) {
  TaskGraph g;
  auto a = task(Resource::kFast, WorkKind::kCompute, 10);
  a.name = "small";
  a.mem_alloc = 1000;
  a.mem_free = 1000;
  const auto ia = g.add(a);
  auto b = task(Resource::kFast, WorkKind::kCompute, 10, {ia});
  b.name = "big";
  b.stage = "train";
  b.mem_alloc = 2u << 20;
  g.add(b);
  try {
    simulate(g, unit_devices());
    FAIL() << "expected SimulatedOom";
  } catch (const SimulatedOom& e) {
    EXPECT_EQ(e.task(), "big");
    EXPECT_NE(std::string(e.what()).find("train"), std::string::npos);
  }
}

TEST(DeviceSim, ResidentBaselineOverCapacity) {
  TaskGraph g;
  g.add(task(Resource::kFast, WorkKind::kCompute, 1));
  g.baseline_memory[static_cast<std::size_t>(Resource::kSlow)] = 2u << 20;
  EXPECT_THROW(simulate(g, unit_devices()), SimulatedOom);
}

TEST(DeviceSim, MemoryHighWater) {
  TaskGraph g;
  auto a = task(Resource::kFast, WorkKind::kCompute, 100, {}, 0);
  a.mem_alloc = a.mem_free = 300;
  auto b = task(Resource::kFast, WorkKind::kCompute, 50, {}, 1);
  b.mem_alloc = b.mem_free = 200;
  g.add(a);
  const auto ib = g.add(b);
  auto c = task(Resource::kFast, WorkKind::kCompute, 10, {ib}, 1);
  c.mem_alloc = c.mem_free = 100;
  g.add(c);
  g.baseline_memory[static_cast<std::size_t>(Resource::kFast)] = 1000;
  const auto r = simulate(g, unit_devices());
  EXPECT_EQ(r.memory_high_water[static_cast<std::size_t>(Resource::kFast)], 1500u);
}

TEST(DeviceSim, RejectsCyclesAndBadWork) {
  TaskGraph g;
  g.add(task(Resource::kFast, WorkKind::kCompute, 1, {1}));
  g.add(task(Resource::kFast, WorkKind::kCompute, 1, {0}));
  EXPECT_THROW(simulate(g, unit_devices()), std::invalid_argument);
  TaskGraph h;
  h.add(task(Resource::kFast, WorkKind::kCompute, -1));
  EXPECT_THROW(simulate(h, unit_devices()), std::invalid_argument);
  TaskGraph x;
  x.add(task(Resource::kFast, WorkKind::kTransfer, 1));
  EXPECT_THROW(simulate(x, unit_devices()), std::invalid_argument);
}

// Random DAGs: per-role work conservation, makespan lower bounds, and the
// trace respects dependencies and lane exclusivity.
TEST(DeviceSim, RandomDagInvariants) {
  std::mt19937_64 rng(17);
  const auto d = unit_devices();
  for (int trial = 0; trial < 200; ++trial) {
    TaskGraph g;
    const int n = 1 + static_cast<int>(rng() % 25);
    std::array<double, kNumResources> work{};
    std::array<double, kNumResources> solo{};
    for (int i = 0; i < n; ++i) {
      const auto res = static_cast<Resource>(rng() % 3);
      const auto kind = res == Resource::kLink ? WorkKind::kTransfer : static_cast<WorkKind>(rng() % 3);
      std::vector<TaskId> deps;
      for (int j = 0; j < i; ++j) {
        if (rng() % 5 == 0) deps.push_back(static_cast<TaskId>(j));
      }
      auto t = task(res, kind, static_cast<double>(rng() % 200), deps, static_cast<std::uint32_t>(rng() % 2));
      work[static_cast<std::size_t>(res)] += t.work;
      solo[static_cast<std::size_t>(res)] += solo_duration(t, d);
      g.add(t);
    }
    const auto r = simulate(g, d);
    const auto again = simulate(g, d);
    ASSERT_EQ(format_trace(r), format_trace(again));
    for (std::size_t k = 0; k < kNumResources; ++k) {
      ASSERT_NEAR(r.work_done[k], work[k], 1e-9 * (1 + work[k]));
      ASSERT_GE(r.makespan + 1e-9, solo[k]);
    }
    ASSERT_GE(r.makespan + 1e-9, r.critical_path);
    const auto& tasks = g.tasks();
    std::map<std::pair<int, std::uint32_t>, std::vector<std::pair<double, double>>> lanes;
    for (TaskId i = 0; i < tasks.size(); ++i) {
      for (TaskId p : tasks[i].deps) ASSERT_GE(r.events[i].start + 1e-12, r.events[p].end);
      lanes[{static_cast<int>(tasks[i].resource), tasks[i].lane}].push_back({r.events[i].start, r.events[i].end});
    }
    for (auto& [key, iv] : lanes) {
      std::sort(iv.begin(), iv.end());
      for (std::size_t i = 1; i < iv.size(); ++i) ASSERT_GE(iv[i].first + 1e-12, iv[i - 1].second);
    }
  }
}

TEST(DeviceSim, TraceFormat) {
  TaskGraph g;
  auto t = task(Resource::kFast, WorkKind::kCompute, 100);
  t.stage = "train";
  t.batch = 3;
  t.super_batch = 0;
  g.add(t);
  EXPECT_EQ(format_trace(simulate(g, unit_devices())), "0 1 fast train 3 0\n");
}

namespace {

std::vector<BatchWork> uniform_batches(std::size_t count, const BatchWork& proto) {
  std::vector<BatchWork> out(count, proto);
  for (std::size_t b = 0; b < count; ++b) out[b].batch = static_cast<std::int64_t>(b);
  return out;
}

double makespan_of(std::span<const BatchWork> batches, Strategy s, bool pipelined, const DeviceSet& d,
                   SimResult* out = nullptr, std::uint32_t depth = 2) {
  SkeletonOptions o;
  o.strategy = s;
  o.pipelined = pipelined;
  o.prefetch_depth = depth;
  auto r = simulate(build_skeleton(batches, {}, o), d);
  if (out) *out = r;
  return r.makespan;
}

}  // namespace

// Sample + gather on the slow device, the transfer and the training step each
// take one second: three overlapping stages over three batches. A prefetch
// depth of 3 lets batch 2 sample while batch 0 trains.
TEST(DeviceSim, PipelinedCaseOneThreeBatches) {
  DeviceSet d = unit_devices();
  d.slow.sample_rate = 1000;
  d.slow.gather_rate = 1000;
  d.link.bandwidth = 8000;
  d.fast.compute_rate = 1000;
  BatchWork w;
  w.sample_edges = 500;
  w.gather_rows = 500;
  w.transfer.raw_feature_reals = 1000;
  w.train_ops = 1000;
  const auto batches = uniform_batches(3, w);
  const double piped = makespan_of(batches, Strategy::kCase1, true, d, nullptr, 3);
  const double serial = makespan_of(batches, Strategy::kCase1, false, d, nullptr, 3);
  EXPECT_NEAR(serial, 9.0, 1e-9);
  EXPECT_NEAR(piped, 5.0, 1e-9);
  EXPECT_LE(piped, 0.6 * serial);
}

// Case4 moves the cached-row gather onto the fast device next to sampling and
// training. Its fast-device utilization rises but, because the added work
// contends for the same device, the makespan gain is smaller than the
// utilization gain. Values pinned from a reference run of this fixture.
TEST(DeviceSim, CaseFourContentionFixture) {
  DeviceSet d = unit_devices();
  d.slow.gather_rate = 400;
  d.fast.sample_rate = 1000;
  d.fast.gather_rate = 800;
  d.fast.compute_rate = 1000;
  d.link.bandwidth = 8000;
  BatchWork w;
  w.sample_edges = 400;
  w.gather_rows = 400;
  w.cached_rows = 200;
  w.transfer.raw_feature_reals = 200;
  w.train_ops = 800;
  const auto batches = uniform_batches(8, w);
  BatchWork w2 = w;
  w2.cached_rows = 0;
  w2.transfer.raw_feature_reals = 400;
  const auto batches2 = uniform_batches(8, w2);
  SimResult r2, r4;
  const double m2 = makespan_of(batches2, Strategy::kCase2, true, d, &r2);
  const double m4 = makespan_of(batches, Strategy::kCase4, true, d, &r4);
  const double u2 = r2.util(Resource::kFast), u4 = r4.util(Resource::kFast);
  EXPECT_GT(u4, u2);
  EXPECT_LT(m2 / m4, u4 / u2);
  EXPECT_NEAR(m2, 12.0, 1e-9);
  EXPECT_NEAR(m4, 11.6, 1e-9);
  EXPECT_NEAR(u2, 0.8, 1e-9);
  EXPECT_NEAR(u4, 1.0, 1e-9);
}
