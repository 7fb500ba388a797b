#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <unordered_map>
#include <vector>

#include "hetgnn/types.hpp"

namespace hetgnn {

struct EmbeddingEntry {
  std::vector<Real> embedding;
  std::uint64_t version = 0;
  std::uint64_t super_batch = 0;
};

struct ReuseEvent {
  VertexId vertex = 0;
  std::uint64_t reading_batch = 0;
  std::uint64_t version = 0;
  std::uint64_t super_batch = 0;  // super-batch the entry was staged for
};

// Historical embeddings with a two-slot layout: `current` holds entries
// staged for the running super-batch (readable), `staging` collects entries
// for the next one (write-only). advance_super_batch swaps the slots and
// drops what was current.
//
// Super-batch k covers global batches [k*n, (k+1)*n). An entry staged during
// super-batch k carries a version in [k*n, (k+1)*n) and is read during k+1,
// so the gap is at most 2n-1.
class EmbeddingStore {
 public:
  EmbeddingStore(std::uint64_t n, std::size_t emb_dim);

  // Stage `emb` for super-batch target. Requires target == current + 1 and a
  // version no older than the start of the current super-batch.
  void put(VertexId v, std::span<const Real> emb, std::uint64_t version, std::uint64_t target_super_batch);

  // Hit: the entry staged for the current super-batch. Throws
  // ContractViolation if reading_batch is outside the current super-batch and
  // StalenessViolation if a hit would exceed the 2n-1 gap.
  std::optional<EmbeddingEntry> get(VertexId v, std::uint64_t reading_batch);
  // Copies into `out` on hit; avoids an allocation per row.
  bool get_into(VertexId v, std::uint64_t reading_batch, std::span<Real> out);

  void advance_super_batch();

  std::uint64_t n() const { return n_; }
  std::size_t emb_dim() const { return emb_dim_; }
  std::uint64_t current_super_batch() const;
  std::size_t current_entries() const;
  std::size_t staged_entries() const;
  std::size_t live_entries() const { return current_entries() + staged_entries(); }
  std::uint64_t memory_bytes() const { return live_entries() * emb_dim_ * kRealSize; }

  std::uint64_t hits() const { return hits_.load(); }
  std::uint64_t misses() const { return misses_.load(); }
  std::uint64_t max_gap() const { return max_gap_.load(); }

  // Called on every hit (from the reading thread).
  void set_reuse_observer(std::function<void(const ReuseEvent&)> fn) { observer_ = std::move(fn); }

 private:
  using Map = std::unordered_map<VertexId, EmbeddingEntry>;

  const EmbeddingEntry* lookup_checked(VertexId v, std::uint64_t reading_batch) const;
  void record_hit(const EmbeddingEntry& e, VertexId v, std::uint64_t reading_batch);

  std::uint64_t n_;
  std::size_t emb_dim_;
  std::uint64_t current_sb_ = 0;
  Map current_;
  Map staging_;
  mutable std::shared_mutex current_mu_;
  mutable std::mutex staging_mu_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> misses_{0};
  std::atomic<std::uint64_t> max_gap_{0};
  std::function<void(const ReuseEvent&)> observer_;
};

}  // namespace hetgnn
