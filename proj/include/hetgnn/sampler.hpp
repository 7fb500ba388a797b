#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "hetgnn/graph.hpp"

namespace hetgnn {

// One layer's bipartite sampled subgraph. src_vertices starts with
// dst_vertices in the same order, so dst-local index i and src-local index i
// name the same vertex. Edges are stored per destination (CSR by dst) and
// always include the self edge; each dst's sources are sorted by local index,
// which fixes the aggregation order.
struct Block {
  std::vector<VertexId> dst_vertices;
  std::vector<VertexId> src_vertices;
  std::vector<std::uint32_t> edge_offsets;  // size num_dst() + 1
  std::vector<std::uint32_t> edge_src;      // local src indices

  std::size_t num_dst() const { return dst_vertices.size(); }
  std::size_t num_src() const { return src_vertices.size(); }
  std::size_t num_edges() const { return edge_src.size(); }
  // Edges excluding the per-dst self edge.
  std::size_t num_sampled_edges() const { return edge_src.size() - dst_vertices.size(); }

  std::span<const std::uint32_t> sources_of(std::size_t dst) const {
    return {edge_src.data() + edge_offsets[dst], edge_offsets[dst + 1] - edge_offsets[dst]};
  }
  // (src-local, dst-local) pairs.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges() const;

  friend bool operator==(const Block&, const Block&) = default;
};

// Per-layer fanouts, outermost (input) layer first: fanouts[l] caps block l.
using Fanouts = std::vector<std::uint32_t>;

struct SampledBlockStack {
  std::vector<Block> blocks;  // bottom (input) layer first
  // Aligned with blocks[0].dst_vertices: the frontier whose bottom-layer
  // output may come from a historical embedding instead of raw features.
  std::vector<std::uint8_t> hot_flags;

  const std::vector<VertexId>& seeds() const { return blocks.back().dst_vertices; }
  std::size_t num_hot() const;

  friend bool operator==(const SampledBlockStack&, const SampledBlockStack&) = default;
};

// Without-replacement uniform neighbour sampling, k hops from `seeds`.
// Neighbour draws for vertex v in layer l come from the stream
// derive_seed(rng_seed, {l, v}), so results are independent of traversal order.
SampledBlockStack sample_khop(const Graph& graph, std::span<const VertexId> seeds,
                              const Fanouts& fanouts, std::uint64_t rng_seed);

// Same topology as sample_khop; additionally flags bottom-frontier vertices
// that belong to `hot_set` (indexed by vertex id).
SampledBlockStack sample_khop_skip_hot(const Graph& graph, std::span<const VertexId> seeds,
                                       const Fanouts& fanouts,
                                       const std::vector<std::uint8_t>& hot_set,
                                       std::uint64_t rng_seed);

// One-hop block for precomputing hot-vertex embeddings (layer index 0).
Block sample_one_hop_hot(const Graph& graph, std::span<const VertexId> hot_vertices,
                         std::uint32_t fanout, std::uint64_t rng_seed);

// Indices chosen by the without-replacement draw: k distinct values from
// [0, n), ascending. Exposed for tests.
std::vector<std::uint32_t> choose_without_replacement(std::uint32_t n, std::uint32_t k,
                                                      std::uint64_t stream_seed);

// Candidate neighbours of v: N_in(v) without v itself.
std::vector<VertexId> sampling_candidates(const Graph& graph, VertexId v);

}  // namespace hetgnn
