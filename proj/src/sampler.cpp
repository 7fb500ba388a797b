#include "hetgnn/sampler.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "hetgnn/rng.hpp"

namespace hetgnn {

std::vector<std::pair<std::uint32_t, std::uint32_t>> Block::edges() const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
  out.reserve(edge_src.size());
  for (std::uint32_t d = 0; d < num_dst(); ++d) {
    for (auto s : sources_of(d)) out.emplace_back(s, d);
  }
  return out;
}

std::size_t SampledBlockStack::num_hot() const {
  return static_cast<std::size_t>(std::count(hot_flags.begin(), hot_flags.end(), std::uint8_t{1}));
}

std::vector<std::uint32_t> choose_without_replacement(std::uint32_t n, std::uint32_t k,
                                                      std::uint64_t stream_seed) {
  std::vector<std::uint32_t> chosen;
  if (k >= n) {
    chosen.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) chosen[i] = i;
    return chosen;
  }
  // Floyd's algorithm: exactly k draws, uniform over k-subsets.
  Rng rng(stream_seed);
  chosen.reserve(k);
  for (std::uint32_t j = n - k; j < n; ++j) {
    const auto t = static_cast<std::uint32_t>(rng.below(static_cast<std::uint64_t>(j) + 1));
    if (std::find(chosen.begin(), chosen.end(), t) == chosen.end()) {
      chosen.push_back(t);
    } else {
      chosen.push_back(j);
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

std::vector<VertexId> sampling_candidates(const Graph& graph, VertexId v) {
  std::vector<VertexId> out;
  const auto nbrs = graph.in_neighbors(v);
  out.reserve(nbrs.size());
  for (VertexId u : nbrs) {
    if (u != v) out.push_back(u);
  }
  return out;
}

namespace {

// Expand `dst` one hop. src list = dst prefix + newly seen neighbours in
// first-occurrence order.
Block expand(const Graph& graph, std::vector<VertexId> dst, std::uint32_t fanout, std::uint64_t layer,
             std::uint64_t rng_seed) {
  Block b;
  b.src_vertices = dst;
  std::unordered_map<VertexId, std::uint32_t> local;
  local.reserve(dst.size() * (fanout + 1));
  for (std::uint32_t i = 0; i < dst.size(); ++i) local.emplace(dst[i], i);

  b.edge_offsets.reserve(dst.size() + 1);
  b.edge_offsets.push_back(0);
  std::vector<std::uint32_t> row;
  for (std::uint32_t i = 0; i < dst.size(); ++i) {
    const VertexId v = dst[i];
    const auto cand = sampling_candidates(graph, v);
    const auto picks = choose_without_replacement(static_cast<std::uint32_t>(cand.size()), fanout,
                                                  derive_seed(rng_seed, {layer, v}));
    row.clear();
    row.push_back(i);  // self edge
    for (auto idx : picks) {
      const VertexId u = cand[idx];
      auto [it, inserted] = local.emplace(u, static_cast<std::uint32_t>(b.src_vertices.size()));
      if (inserted) b.src_vertices.push_back(u);
      row.push_back(it->second);
    }
    std::sort(row.begin(), row.end());
    b.edge_src.insert(b.edge_src.end(), row.begin(), row.end());
    b.edge_offsets.push_back(static_cast<std::uint32_t>(b.edge_src.size()));
  }
  b.dst_vertices = std::move(dst);
  return b;
}

std::vector<VertexId> dedup_stable(std::span<const VertexId> ids) {
  std::vector<VertexId> out;
  std::unordered_map<VertexId, bool> seen;
  seen.reserve(ids.size());
  for (VertexId v : ids) {
    if (seen.emplace(v, true).second) out.push_back(v);
  }
  return out;
}

void check_inputs(const Graph& graph, std::span<const VertexId> seeds, const Fanouts& fanouts) {
  if (seeds.empty()) throw std::invalid_argument("sampler: empty seed list");
  if (fanouts.empty()) throw std::invalid_argument("sampler: no layers");
  for (auto f : fanouts) {
    if (f < 1) throw std::invalid_argument("sampler: fanouts must be >= 1");
  }
  for (VertexId v : seeds) {
    if (v >= graph.num_vertices()) throw std::invalid_argument("sampler: seed id out of range");
  }
}

}  // namespace

SampledBlockStack sample_khop(const Graph& graph, std::span<const VertexId> seeds,
                              const Fanouts& fanouts, std::uint64_t rng_seed) {
  check_inputs(graph, seeds, fanouts);
  SampledBlockStack stack;
  stack.blocks.resize(fanouts.size());
  std::vector<VertexId> frontier = dedup_stable(seeds);
  for (std::size_t l = fanouts.size(); l-- > 0;) {
    stack.blocks[l] = expand(graph, std::move(frontier), fanouts[l], l, rng_seed);
    frontier = stack.blocks[l].src_vertices;
  }
  stack.hot_flags.assign(stack.blocks[0].num_dst(), 0);
  return stack;
}

SampledBlockStack sample_khop_skip_hot(const Graph& graph, std::span<const VertexId> seeds,
                                       const Fanouts& fanouts,
                                       const std::vector<std::uint8_t>& hot_set,
                                       std::uint64_t rng_seed) {
  SampledBlockStack stack = sample_khop(graph, seeds, fanouts, rng_seed);
  const auto& frontier = stack.blocks[0].dst_vertices;
  for (std::size_t i = 0; i < frontier.size(); ++i) {
    const VertexId v = frontier[i];
    stack.hot_flags[i] = (v < hot_set.size() && hot_set[v]) ? 1 : 0;
  }
  return stack;
}

Block sample_one_hop_hot(const Graph& graph, std::span<const VertexId> hot_vertices,
                         std::uint32_t fanout, std::uint64_t rng_seed) {
  if (hot_vertices.empty()) throw std::invalid_argument("sample_one_hop_hot: empty hot list");
  if (fanout < 1) throw std::invalid_argument("sample_one_hop_hot: fanout must be >= 1");
  auto dst = dedup_stable(hot_vertices);
  if (dst.size() != hot_vertices.size()) {
    throw std::invalid_argument("sample_one_hop_hot: hot list has duplicates");
  }
  for (VertexId v : dst) {
    if (v >= graph.num_vertices()) throw std::invalid_argument("sample_one_hop_hot: id out of range");
  }
  return expand(graph, std::move(dst), fanout, 0, rng_seed);
}

}  // namespace hetgnn
