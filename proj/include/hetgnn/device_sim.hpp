#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hetgnn/types.hpp"

namespace hetgnn {

enum class Resource : std::uint8_t { kSlow = 0, kFast = 1, kLink = 2 };
inline constexpr std::size_t kNumResources = 3;
const char* to_string(Resource r);

struct DeviceModel {
  double compute_rate = 1e9;  // ops/s
  double sample_rate = 1e7;   // sampled edges/s
  double gather_rate = 1e6;   // feature rows/s
  std::uint64_t memory_capacity = std::uint64_t{1} << 34;
};

struct LinkModel {
  double bandwidth = 1e10;  // bytes/s
  double latency = 0.0;     // s per transfer
};

struct DeviceSet {
  DeviceModel slow;
  DeviceModel fast;
  LinkModel link;
  // Weight of a co-resident task when several lanes share a resource.
  double contention_weight = 1.0;

  void validate() const;
};

enum class WorkKind : std::uint8_t { kCompute, kSample, kGather, kTransfer };

using TaskId = std::size_t;

struct SimTask {
  std::string name;
  Resource resource = Resource::kFast;
  std::uint32_t lane = 0;  // sequential executor within the resource
  WorkKind kind = WorkKind::kCompute;
  double work = 0.0;       // ops, edges, rows or bytes depending on kind
  std::vector<TaskId> deps;
  std::string stage;
  std::int64_t batch = -1;
  std::int64_t super_batch = -1;
  double weight = 1.0;     // contention share
  // Memory on `mem_resource`: allocated at start, released at finish.
  Resource mem_resource = Resource::kFast;
  std::uint64_t mem_alloc = 0;
  std::uint64_t mem_free = 0;
};

// Dependency DAG plus per-task work.
class TaskGraph {
 public:
  TaskId add(SimTask t);
  const std::vector<SimTask>& tasks() const { return tasks_; }
  std::vector<SimTask>& tasks() { return tasks_; }
  std::size_t size() const { return tasks_.size(); }
  // Memory resident before any task runs (graph topology, caches).
  std::array<std::uint64_t, kNumResources> baseline_memory{};

 private:
  std::vector<SimTask> tasks_;
};

struct TraceEvent {
  double start = 0;
  double end = 0;
  std::string role;  // resource name, with "#lane" for lanes > 0
  std::string stage;
  std::int64_t batch = -1;
  std::int64_t super_batch = -1;
  double bytes_moved = 0;
  double ops_done = 0;
  TaskId task = 0;
};

struct SimResult {
  std::vector<TraceEvent> events;  // ordered by task id
  double makespan = 0;
  std::array<double, kNumResources> busy{};         // union of busy intervals
  std::array<double, kNumResources> utilization{};  // busy / makespan
  std::array<double, kNumResources> work_done{};    // per resource, in task units
  std::array<std::uint64_t, kNumResources> memory_high_water{};
  double critical_path = 0;  // dependency chain lower bound at full rates

  double util(Resource r) const { return utilization[static_cast<std::size_t>(r)]; }
};

// Duration of a task running alone on its resource.
double solo_duration(const SimTask& t, const DeviceSet& d);

// Event-driven list scheduler. Each (resource, lane) runs one task at a time,
// choosing the ready task with the earliest ready time (ties by task id).
// Tasks on different lanes of the same resource share it in proportion to
// their weights. Throws SimulatedOom when an allocation exceeds capacity and
// std::invalid_argument on cycles or bad work amounts.
SimResult simulate(const TaskGraph& graph, const DeviceSet& devices);

// Effective rate multiplier for each of `weights` co-resident tasks.
std::vector<double> contention_shares(const std::vector<double>& weights);

// Export: one line per event, "t_start t_end role stage batch super_batch".
std::string format_trace(const SimResult& r);

}  // namespace hetgnn
