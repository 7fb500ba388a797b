#include "hetgnn/device_sim.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace hetgnn {

const char* to_string(Resource r) {
  switch (r) {
    case Resource::kSlow:
      return "slow";
    case Resource::kFast:
      return "fast";
    case Resource::kLink:
      return "link";
  }
  return "?";
}

void DeviceSet::validate() const {
  for (const auto* d : {&slow, &fast}) {
    if (!(d->compute_rate > 0 && d->sample_rate > 0 && d->gather_rate > 0)) {
      throw ConfigError("device rates must be > 0");
    }
  }
  if (!(link.bandwidth > 0)) throw ConfigError("link bandwidth must be > 0");
  if (!(link.latency >= 0)) throw ConfigError("link latency must be >= 0");
  if (!(contention_weight > 0)) throw ConfigError("contention weight must be > 0");
}

TaskId TaskGraph::add(SimTask t) {
  tasks_.push_back(std::move(t));
  return tasks_.size() - 1;
}

double solo_duration(const SimTask& t, const DeviceSet& d) {
  if (!(t.work >= 0) || !std::isfinite(t.work)) {
    throw std::invalid_argument("task '" + t.name + "': work must be finite and >= 0");
  }
  if (t.resource == Resource::kLink) {
    if (t.kind != WorkKind::kTransfer) throw std::invalid_argument("task '" + t.name + "': link runs transfers only");
    return d.link.latency + t.work / d.link.bandwidth;
  }
  if (t.kind == WorkKind::kTransfer) {
    throw std::invalid_argument("task '" + t.name + "': transfers must run on the link");
  }
  const DeviceModel& m = t.resource == Resource::kSlow ? d.slow : d.fast;
  switch (t.kind) {
    case WorkKind::kCompute:
      return t.work / m.compute_rate;
    case WorkKind::kSample:
      return t.work / m.sample_rate;
    case WorkKind::kGather:
      return t.work / m.gather_rate;
    case WorkKind::kTransfer:
      break;
  }
  return 0.0;
}

std::vector<double> contention_shares(const std::vector<double>& weights) {
  double total = 0;
  for (double w : weights) total += w;
  std::vector<double> s(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) s[i] = weights[i] / total;
  return s;
}

namespace {

std::string role_name(Resource r, std::uint32_t lane) {
  std::string s = to_string(r);
  if (lane > 0) s += "#" + std::to_string(lane);
  return s;
}

std::uint64_t capacity_of(Resource r, const DeviceSet& d) {
  if (r == Resource::kSlow) return d.slow.memory_capacity;
  if (r == Resource::kFast) return d.fast.memory_capacity;
  return std::numeric_limits<std::uint64_t>::max();
}

}  // namespace

SimResult simulate(const TaskGraph& graph, const DeviceSet& devices) {
  devices.validate();
  const auto& tasks = graph.tasks();
  const std::size_t n = tasks.size();
  SimResult res;
  res.events.resize(n);

  std::vector<double> solo(n);
  std::vector<std::vector<TaskId>> children(n);
  std::vector<std::size_t> pending(n, 0);
  for (TaskId i = 0; i < n; ++i) {
    solo[i] = solo_duration(tasks[i], devices);
    if (!(tasks[i].weight > 0)) throw std::invalid_argument("task '" + tasks[i].name + "': weight must be > 0");
    for (TaskId d : tasks[i].deps) {
      if (d >= n || d == i) throw std::invalid_argument("task '" + tasks[i].name + "': bad dependency");
      children[d].push_back(i);
      ++pending[i];
    }
  }

  // Critical path at solo rates (Kahn order also detects cycles).
  {
    std::vector<std::size_t> indeg = pending;
    std::vector<double> finish(n, 0.0);
    std::vector<TaskId> order;
    for (TaskId i = 0; i < n; ++i) {
      if (indeg[i] == 0) order.push_back(i);
    }
    for (std::size_t k = 0; k < order.size(); ++k) {
      const TaskId i = order[k];
      double start = 0;
      for (TaskId d : tasks[i].deps) start = std::max(start, finish[d]);
      finish[i] = start + solo[i];
      res.critical_path = std::max(res.critical_path, finish[i]);
      for (TaskId c : children[i]) {
        if (--indeg[c] == 0) order.push_back(c);
      }
    }
    if (order.size() != n) throw std::invalid_argument("simulate: dependency graph has a cycle");
  }

  using LaneKey = std::pair<std::uint8_t, std::uint32_t>;
  std::map<LaneKey, std::set<std::pair<double, TaskId>>> ready;
  std::map<LaneKey, std::int64_t> running_on;  // -1 idle
  for (const auto& t : tasks) running_on[{static_cast<std::uint8_t>(t.resource), t.lane}] = -1;
  for (TaskId i = 0; i < n; ++i) {
    if (pending[i] == 0) ready[{static_cast<std::uint8_t>(tasks[i].resource), tasks[i].lane}].insert({0.0, i});
  }

  std::vector<double> remaining = solo;
  std::vector<TaskId> running;
  std::array<std::uint64_t, kNumResources> mem = graph.baseline_memory;
  res.memory_high_water = mem;
  for (std::size_t r = 0; r < 2; ++r) {
    const auto cap = capacity_of(static_cast<Resource>(r), devices);
    if (mem[r] > cap) {
      throw SimulatedOom("<resident>", to_string(static_cast<Resource>(r)), "setup", mem[r], cap);
    }
  }
  double now = 0;
  std::size_t done = 0;

  while (done < n) {
    for (auto& [key, q] : ready) {
      if (q.empty() || running_on[key] != -1) continue;
      const TaskId i = q.begin()->second;
      q.erase(q.begin());
      const auto& t = tasks[i];
      const auto mr = static_cast<std::size_t>(t.mem_resource);
      if (t.mem_alloc > 0 && t.mem_resource != Resource::kLink) {
        mem[mr] += t.mem_alloc;
        const auto cap = capacity_of(t.mem_resource, devices);
        if (mem[mr] > cap) throw SimulatedOom(t.name, to_string(t.mem_resource), t.stage, mem[mr], cap);
        res.memory_high_water[mr] = std::max(res.memory_high_water[mr], mem[mr]);
      }
      running_on[key] = static_cast<std::int64_t>(i);
      running.push_back(i);
      auto& ev = res.events[i];
      ev.start = now;
      ev.role = role_name(t.resource, t.lane);
      ev.stage = t.stage;
      ev.batch = t.batch;
      ev.super_batch = t.super_batch;
      ev.task = i;
      ev.bytes_moved = t.kind == WorkKind::kTransfer ? t.work : 0.0;
      ev.ops_done = t.work;
    }
    if (running.empty()) throw std::invalid_argument("simulate: no runnable task (dependency deadlock)");

    std::array<double, kNumResources> wsum{};
    for (TaskId i : running) wsum[static_cast<std::size_t>(tasks[i].resource)] += tasks[i].weight;
    std::vector<double> rate(running.size());
    double dt = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < running.size(); ++k) {
      const auto& t = tasks[running[k]];
      rate[k] = t.weight / wsum[static_cast<std::size_t>(t.resource)];
      dt = std::min(dt, remaining[running[k]] / rate[k]);
    }
    for (std::size_t r = 0; r < kNumResources; ++r) {
      if (wsum[r] > 0) res.busy[r] += dt;
    }
    now += dt;
    std::vector<TaskId> still;
    for (std::size_t k = 0; k < running.size(); ++k) {
      const TaskId i = running[k];
      const double left = remaining[i] - dt * rate[k];
      if (left <= 1e-12 * std::max(1.0, solo[i]) || remaining[i] / rate[k] <= dt) {
        remaining[i] = 0;
        const auto& t = tasks[i];
        res.events[i].end = now;
        res.work_done[static_cast<std::size_t>(t.resource)] += t.work;
        if (t.mem_free > 0 && t.mem_resource != Resource::kLink) {
          auto& m = mem[static_cast<std::size_t>(t.mem_resource)];
          m -= std::min(m, t.mem_free);
        }
        running_on[{static_cast<std::uint8_t>(t.resource), t.lane}] = -1;
        ++done;
        for (TaskId c : children[i]) {
          if (--pending[c] == 0) ready[{static_cast<std::uint8_t>(tasks[c].resource), tasks[c].lane}].insert({now, c});
        }
      } else {
        remaining[i] = left;
        still.push_back(i);
      }
    }
    running.swap(still);
  }
  res.makespan = now;
  for (std::size_t r = 0; r < kNumResources; ++r) {
    res.utilization[r] = now > 0 ? res.busy[r] / now : 0.0;
  }
  return res;
}

std::string format_trace(const SimResult& r) {
  std::vector<const TraceEvent*> ev;
  for (const auto& e : r.events) ev.push_back(&e);
  std::stable_sort(ev.begin(), ev.end(), [](const TraceEvent* a, const TraceEvent* b) {
    return a->start < b->start || (a->start == b->start && a->task < b->task);
  });
  std::ostringstream out;
  out << std::setprecision(9);
  for (const auto* e : ev) {
    out << e->start << ' ' << e->end << ' ' << e->role << ' ' << e->stage << ' ' << e->batch << ' '
        << e->super_batch << '\n';
  }
  return out.str();
}

}  // namespace hetgnn
