#include <gtest/gtest.h>

#include <atomic>
#include <map>
#include <random>
#include <thread>

#include "hetgnn/embedding_store.hpp"

using namespace hetgnn;

namespace {

std::vector<Real> filled(std::size_t dim, Real x) { return std::vector<Real>(dim, x); }

}  // namespace

TEST(EmbeddingStore, PutDuringSuperBatchZeroAccepted) {
  EmbeddingStore s(4, 3);
  s.put(5, filled(3, 1.0), 2, 1);
  EXPECT_EQ(s.staged_entries(), 1u);
  EXPECT_EQ(s.current_entries(), 0u);
}

TEST(EmbeddingStore, WrongTargetIsContractViolation) {
  EmbeddingStore s(4, 3);
  EXPECT_THROW(s.put(5, filled(3, 1.0), 0, 0), ContractViolation);
  EXPECT_THROW(s.put(5, filled(3, 1.0), 0, 2), ContractViolation);
  EXPECT_THROW(s.put(5, filled(2, 1.0), 0, 1), ContractViolation);
  // Versions must come from the running super-batch.
  EXPECT_THROW(s.put(5, filled(3, 1.0), 4, 1), ContractViolation);
  s.advance_super_batch();
  EXPECT_THROW(s.put(5, filled(3, 1.0), 3, 2), ContractViolation);
}

TEST(EmbeddingStore, LastWriteWins) {
  EmbeddingStore s(4, 2);
  s.put(1, filled(2, 1.0), 1, 1);
  s.put(1, filled(2, 2.0), 3, 1);
  s.advance_super_batch();
  const auto e = s.get(1, 4);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->embedding, filled(2, 2.0));
  EXPECT_EQ(e->version, 3u);
  EXPECT_EQ(s.current_entries(), 1u);
}

TEST(EmbeddingStore, MaximalGapIsTwoNMinusOne) {
  EmbeddingStore s(4, 1);
  s.put(9, filled(1, 0.5), 0, 1);
  s.advance_super_batch();
  const auto e = s.get(9, 7);
  ASSERT_TRUE(e);
  EXPECT_EQ(7 - e->version, 7u);
  EXPECT_EQ(s.max_gap(), 7u);
  // Batch 8 belongs to super-batch 2: not readable until the boundary, and
  // the entry is gone after it.
  EXPECT_THROW(s.get(9, 8), ContractViolation);
  s.advance_super_batch();
  EXPECT_FALSE(s.get(9, 8));
}

TEST(EmbeddingStore, EmptyAdvanceGivesMisses) {
  EmbeddingStore s(2, 1);
  s.advance_super_batch();
  EXPECT_FALSE(s.get(0, 2));
  EXPECT_FALSE(s.get(1, 3));
  EXPECT_EQ(s.misses(), 2u);
  EXPECT_EQ(s.hits(), 0u);
}

TEST(EmbeddingStore, StageAdvanceHitEach) {
  EmbeddingStore s(3, 2);
  for (VertexId v = 0; v < 10; ++v) s.put(v, filled(2, v), v % 3, 1);
  s.advance_super_batch();
  for (VertexId v = 0; v < 10; ++v) {
    const auto e = s.get(v, 3 + v % 3);
    ASSERT_TRUE(e);
    EXPECT_EQ(e->embedding, filled(2, v));
  }
  EXPECT_EQ(s.hits(), 10u);
}

TEST(EmbeddingStore, ReadOutsideCurrentSuperBatchThrows) {
  EmbeddingStore s(4, 1);
  EXPECT_THROW(s.get(0, 4), ContractViolation);
  s.advance_super_batch();
  EXPECT_THROW(s.get(0, 3), ContractViolation);
  std::vector<Real> out(1);
  EXPECT_THROW(s.get_into(0, 9, out), ContractViolation);
}

TEST(EmbeddingStore, MemoryAccountingMatchesLiveCount) {
  std::mt19937_64 rng(3);
  const std::size_t dim = 5;
  EmbeddingStore s(2, dim);
  std::map<VertexId, int> current, staging;
  for (int step = 0; step < 400; ++step) {
    if (rng() % 7 == 0) {
      s.advance_super_batch();
      current = std::move(staging);
      staging.clear();
    } else {
      const VertexId v = static_cast<VertexId>(rng() % 30);
      const std::uint64_t sb = s.current_super_batch();
      s.put(v, filled(dim, 0), sb * 2 + rng() % 2, sb + 1);
      staging[v] = 1;
    }
    ASSERT_EQ(s.memory_bytes(), (current.size() + staging.size()) * dim * sizeof(Real));
  }
}

TEST(EmbeddingStore, ObserverSeesEveryHit) {
  EmbeddingStore s(2, 1);
  std::vector<ReuseEvent> seen;
  s.set_reuse_observer([&](const ReuseEvent& e) { seen.push_back(e); });
  s.put(4, filled(1, 1), 1, 1);
  s.advance_super_batch();
  std::vector<Real> out(1);
  EXPECT_TRUE(s.get_into(4, 3, out));
  EXPECT_FALSE(s.get_into(5, 3, out));
  ASSERT_EQ(seen.size(), 1u);
  EXPECT_EQ(seen[0].vertex, 4u);
  EXPECT_EQ(seen[0].reading_batch, 3u);
  EXPECT_EQ(seen[0].version, 1u);
  EXPECT_EQ(seen[0].super_batch, 1u);
}

// Random operation schedules checked against a reference model of the two
// slots: every hit must return the model's entry with gap <= 2n-1, and every
// miss must be a vertex the model does not hold.
TEST(EmbeddingStore, RandomScheduleFuzz) {
  std::mt19937_64 rng(2024);
  for (int run = 0; run < 1000; ++run) {
    const std::uint64_t n = std::uint64_t{1} << (run % 4);
    EmbeddingStore s(n, 2);
    std::map<VertexId, std::uint64_t> current, staging;  // vertex -> version
    std::uint64_t batch = 0;
    const int steps = 20 + static_cast<int>(rng() % 60);
    for (int step = 0; step < steps; ++step) {
      const std::uint64_t sb = s.current_super_batch();
      switch (rng() % 3) {
        case 0: {
          const VertexId v = static_cast<VertexId>(rng() % 8);
          const std::uint64_t version = sb * n + rng() % n;
          s.put(v, filled(2, static_cast<Real>(version)), version, sb + 1);
          staging[v] = version;
          break;
        }
        case 1: {
          const std::uint64_t b = sb * n + rng() % n;
          batch = std::max(batch, b);
          const VertexId v = static_cast<VertexId>(rng() % 8);
          const auto e = s.get(v, b);
          const auto it = current.find(v);
          ASSERT_EQ(e.has_value(), it != current.end());
          if (e) {
            ASSERT_EQ(e->version, it->second);
            ASSERT_EQ(e->super_batch, sb);
            ASSERT_LE(b - e->version, 2 * n - 1);
            ASSERT_EQ(e->embedding, filled(2, static_cast<Real>(e->version)));
          }
          break;
        }
        default:
          s.advance_super_batch();
          current = std::move(staging);
          staging.clear();
          break;
      }
    }
    ASSERT_LE(s.max_gap(), 2 * n - 1);
  }
}

// One writer, one reader, one coordinator on distinct threads. Embeddings are
// filled with their version so a torn copy would show mixed values.
TEST(EmbeddingStore, ConcurrentRolesNeverTear) {
  const std::uint64_t n = 4;
  const std::size_t dim = 64;
  const std::uint64_t rounds = 200;
  EmbeddingStore s(n, dim);
  std::atomic<std::uint64_t> sb{0};
  std::atomic<bool> torn{false};
  std::atomic<std::uint64_t> staged{0};
  std::atomic<std::uint64_t> read_done{0};
  std::thread writer([&] {
    for (std::uint64_t k = 0; k < rounds; ++k) {
      while (sb.load() != k) std::this_thread::yield();
      for (std::uint64_t j = 0; j < n; ++j) {
        for (VertexId v = 0; v < 16; ++v) s.put(v, filled(dim, static_cast<Real>(k * n + j)), k * n + j, k + 1);
      }
      staged.store(k + 1);
    }
  });
  std::thread reader([&] {
    std::vector<Real> out(dim);
    for (std::uint64_t k = 0; k < rounds; ++k) {
      while (sb.load() != k) std::this_thread::yield();
      for (std::uint64_t b = k * n; b < (k + 1) * n; ++b) {
        for (VertexId v = 0; v < 16; ++v) {
          if (s.get_into(v, b, out)) {
            for (Real x : out) {
              if (x != out[0]) torn = true;
            }
          }
        }
      }
      read_done.store(k + 1);
    }
  });
  for (std::uint64_t k = 0; k < rounds; ++k) {
    while (staged.load() != k + 1 || read_done.load() != k + 1) std::this_thread::yield();
    s.advance_super_batch();
    sb.store(k + 1);
  }
  writer.join();
  reader.join();
  EXPECT_FALSE(torn.load());
  EXPECT_LE(s.max_gap(), 2 * n - 1);
  EXPECT_EQ(s.hits(), (rounds - 1) * n * 16);
}
