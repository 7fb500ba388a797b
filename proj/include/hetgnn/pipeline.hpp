#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <mutex>

#include "hetgnn/model.hpp"

namespace hetgnn {

// Thrown out of blocking waits when the run is being torn down.
class PipelineAborted : public std::runtime_error {
 public:
  PipelineAborted() : std::runtime_error("pipeline aborted") {}
};

// Monotone counter that threads can wait on.
class VersionSignal {
 public:
  void set(std::uint64_t v);
  // Blocks until value >= v.
  void wait_at_least(std::uint64_t v);
  std::uint64_t value() const;
  void abort();

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::uint64_t value_ = 0;
  bool aborted_ = false;
};

// Bottom-layer parameters published by the fast role after every optimizer
// step, keyed by version (steps applied). The slow role takes exact versions.
class ParamSnapshotBoard {
 public:
  void publish(std::uint64_t version, const LayerParams& bottom);
  // Blocks until `version` is published; versions below it are dropped.
  LayerParams take(std::uint64_t version);
  std::uint64_t latest() const { return latest_.load(); }
  std::size_t retained() const;
  void abort();

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::map<std::uint64_t, LayerParams> snapshots_;
  std::atomic<std::uint64_t> latest_{0};
  bool aborted_ = false;
};

}  // namespace hetgnn
