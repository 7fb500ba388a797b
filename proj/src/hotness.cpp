#include "hetgnn/hotness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "hetgnn/rng.hpp"

namespace hetgnn {

HotnessTable HotnessTable::from_counts(std::vector<std::uint64_t> counts, std::uint32_t rounds) {
  HotnessTable t;
  t.counts = std::move(counts);
  t.rounds = rounds;
  t.rank.resize(t.counts.size());
  std::iota(t.rank.begin(), t.rank.end(), VertexId{0});
  std::stable_sort(t.rank.begin(), t.rank.end(),
                   [&](VertexId a, VertexId b) { return t.counts[a] > t.counts[b]; });
  return t;
}

std::vector<std::uint32_t> HotnessTable::positions() const {
  std::vector<std::uint32_t> pos(rank.size());
  for (std::uint32_t i = 0; i < rank.size(); ++i) pos[rank[i]] = i;
  return pos;
}

std::vector<std::vector<VertexId>> make_batches(std::span<const VertexId> train, std::size_t batch_size,
                                                std::uint64_t shuffle_seed) {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
  std::vector<VertexId> order(train.begin(), train.end());
  Rng rng(shuffle_seed);
  shuffle_in_place(order, rng);
  std::vector<std::vector<VertexId>> out;
  for (std::size_t lo = 0; lo < order.size(); lo += batch_size) {
    const auto hi = std::min(order.size(), lo + batch_size);
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(lo),
                     order.begin() + static_cast<std::ptrdiff_t>(hi));
  }
  return out;
}

HotnessTable estimate_hotness(const Graph& graph, std::span<const VertexId> train_set,
                              const Fanouts& fanouts, std::uint32_t rounds, std::uint64_t seed,
                              std::size_t batch_size) {
  if (train_set.empty()) throw std::invalid_argument("estimate_hotness: empty train set");
  if (rounds < 1) throw std::invalid_argument("estimate_hotness: rounds must be >= 1");
  std::vector<std::uint64_t> counts(graph.num_vertices(), 0);
  for (std::uint32_t r = 0; r < rounds; ++r) {
    const auto batches = make_batches(train_set, batch_size, derive_seed(seed, {0x9E5, r}));
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const auto stack = sample_khop(graph, batches[b], fanouts, derive_seed(seed, {0x9E5A, r, b}));
      for (VertexId v : stack.blocks[0].src_vertices) counts[v]++;
    }
  }
  return HotnessTable::from_counts(std::move(counts), rounds);
}

std::vector<VertexId> select_hot(const HotnessTable& table, double hot_ratio) {
  if (!(hot_ratio >= 0.0 && hot_ratio <= 1.0)) {
    throw std::invalid_argument("select_hot: hot_ratio must be in [0, 1]");
  }
  const auto n = static_cast<std::size_t>(
      std::floor(hot_ratio * static_cast<double>(table.rank.size()) + 1e-9));
  return {table.rank.begin(), table.rank.begin() + static_cast<std::ptrdiff_t>(std::min(n, table.rank.size()))};
}

std::vector<std::uint8_t> HotSetPartition::membership(VertexId num_vertices) const {
  std::vector<std::uint8_t> m(num_vertices, 0);
  for (VertexId v : cpu_compute) m.at(v) = 1;
  for (VertexId v : gpu_cache) m.at(v) = 2;
  return m;
}

HotSetPartition partition_hot(std::span<const VertexId> hot_list, const PartitionFeedback& fb,
                              std::size_t feat_dim, std::size_t emb_dim, double hot_ratio) {
  HotSetPartition p;
  p.hot_ratio = hot_ratio;
  const std::uint64_t row = static_cast<std::uint64_t>(feat_dim) * kRealSize;
  double idle = fb.observed_fast_idle_time;
  std::uint64_t free = fb.free_fast_memory;
  std::size_t moved = 0;
  while (moved < hot_list.size() && idle > 0.0 && row > 0 && free >= row) {
    p.gpu_cache.push_back(hot_list[moved]);
    free -= row;
    idle -= fb.slow_time_per_vertex;
    ++moved;
  }
  p.cpu_compute.assign(hot_list.begin() + static_cast<std::ptrdiff_t>(moved), hot_list.end());
  p.cache_bytes = p.gpu_cache.size() * row;
  p.embedding_bytes = 2 * p.cpu_compute.size() * static_cast<std::uint64_t>(emb_dim) * kRealSize;
  return p;
}

HotSetPartition HotPartitioner::update(std::span<const VertexId> hot_list, PartitionFeedback fb,
                                       std::size_t feat_dim, std::size_t emb_dim, double hot_ratio) {
  idle_ = primed_ ? alpha_ * fb.observed_fast_idle_time + (1.0 - alpha_) * idle_
                  : fb.observed_fast_idle_time;
  primed_ = true;
  fb.observed_fast_idle_time = idle_;
  return partition_hot(hot_list, fb, feat_dim, emb_dim, hot_ratio);
}

namespace {

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("spearman: need equal sizes >= 2");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0 || sbb == 0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace hetgnn
