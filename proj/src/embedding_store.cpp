#include "hetgnn/embedding_store.hpp"

#include <algorithm>
#include <string>

namespace hetgnn {

EmbeddingStore::EmbeddingStore(std::uint64_t n, std::size_t emb_dim) : n_(n), emb_dim_(emb_dim) {
  if (n_ < 1) throw ContractViolation("EmbeddingStore: n must be >= 1");
  if (emb_dim_ < 1) throw ContractViolation("EmbeddingStore: emb_dim must be >= 1");
}

void EmbeddingStore::put(VertexId v, std::span<const Real> emb, std::uint64_t version,
                         std::uint64_t target_super_batch) {
  if (emb.size() != emb_dim_) throw ContractViolation("EmbeddingStore::put: wrong embedding width");
  // Lock order: current, then staging.
  std::shared_lock cur(current_mu_);
  if (target_super_batch != current_sb_ + 1) {
    throw ContractViolation("EmbeddingStore::put: target super-batch " + std::to_string(target_super_batch) +
                            " != current + 1 (" + std::to_string(current_sb_ + 1) + ")");
  }
  if (version < current_sb_ * n_) {
    throw ContractViolation("EmbeddingStore::put: version " + std::to_string(version) +
                            " predates super-batch " + std::to_string(current_sb_));
  }
  if (version >= (current_sb_ + 1) * n_) {
    throw ContractViolation("EmbeddingStore::put: version " + std::to_string(version) +
                            " is ahead of super-batch " + std::to_string(current_sb_));
  }
  EmbeddingEntry e{std::vector<Real>(emb.begin(), emb.end()), version, target_super_batch};
  std::lock_guard st(staging_mu_);
  staging_[v] = std::move(e);
}

const EmbeddingEntry* EmbeddingStore::lookup_checked(VertexId v, std::uint64_t reading_batch) const {
  if (reading_batch / n_ != current_sb_) {
    throw ContractViolation("EmbeddingStore::get: batch " + std::to_string(reading_batch) +
                            " is outside super-batch " + std::to_string(current_sb_));
  }
  const auto it = current_.find(v);
  if (it == current_.end()) return nullptr;
  const auto& e = it->second;
  if (e.super_batch != current_sb_ || e.version > reading_batch || reading_batch - e.version > 2 * n_ - 1) {
    throw StalenessViolation("EmbeddingStore::get: vertex " + std::to_string(v) + " version " +
                             std::to_string(e.version) + " read at batch " + std::to_string(reading_batch) +
                             " (n=" + std::to_string(n_) + ")");
  }
  return &e;
}

void EmbeddingStore::record_hit(const EmbeddingEntry& e, VertexId v, std::uint64_t reading_batch) {
  hits_.fetch_add(1);
  const std::uint64_t gap = reading_batch - e.version;
  std::uint64_t prev = max_gap_.load();
  while (gap > prev && !max_gap_.compare_exchange_weak(prev, gap)) {
  }
  if (observer_) observer_(ReuseEvent{v, reading_batch, e.version, e.super_batch});
}

std::optional<EmbeddingEntry> EmbeddingStore::get(VertexId v, std::uint64_t reading_batch) {
  std::shared_lock cur(current_mu_);
  const auto* e = lookup_checked(v, reading_batch);
  if (!e) {
    misses_.fetch_add(1);
    return std::nullopt;
  }
  record_hit(*e, v, reading_batch);
  return *e;
}

bool EmbeddingStore::get_into(VertexId v, std::uint64_t reading_batch, std::span<Real> out) {
  if (out.size() != emb_dim_) throw ContractViolation("EmbeddingStore::get_into: wrong output width");
  std::shared_lock cur(current_mu_);
  const auto* e = lookup_checked(v, reading_batch);
  if (!e) {
    misses_.fetch_add(1);
    return false;
  }
  std::copy(e->embedding.begin(), e->embedding.end(), out.begin());
  record_hit(*e, v, reading_batch);
  return true;
}

void EmbeddingStore::advance_super_batch() {
  std::unique_lock cur(current_mu_);
  std::lock_guard st(staging_mu_);
  current_.swap(staging_);
  staging_.clear();
  ++current_sb_;
}

std::uint64_t EmbeddingStore::current_super_batch() const {
  std::shared_lock cur(current_mu_);
  return current_sb_;
}

std::size_t EmbeddingStore::current_entries() const {
  std::shared_lock cur(current_mu_);
  return current_.size();
}

std::size_t EmbeddingStore::staged_entries() const {
  std::lock_guard st(staging_mu_);
  return staging_.size();
}

}  // namespace hetgnn
