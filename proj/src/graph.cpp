#include "hetgnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "hetgnn/rng.hpp"

namespace hetgnn {

Graph::Graph(std::vector<EdgeIndex> offsets, std::vector<VertexId> targets)
    : offsets_(std::move(offsets)), targets_(std::move(targets)) {
  validate();
}

bool Graph::has_self_loop(VertexId v) const {
  const auto nbrs = in_neighbors(v);
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

void Graph::validate() const {
  if (offsets_.empty()) throw GraphError("graph: offsets array is empty");
  if (offsets_.front() != 0) throw GraphError("graph: offsets[0] != 0");
  if (offsets_.back() != targets_.size()) {
    throw GraphError("graph: offsets[num_vertices] != num_edges");
  }
  for (std::size_t i = 1; i < offsets_.size(); ++i) {
    if (offsets_[i] < offsets_[i - 1]) {
      throw GraphError("graph: offsets decrease at vertex " + std::to_string(i - 1));
    }
  }
  const auto n = num_vertices();
  for (VertexId t : targets_) {
    if (t >= n) throw GraphError("graph: neighbour id " + std::to_string(t) + " out of range");
  }
}

Graph build_graph(VertexId num_vertices, std::span<const std::pair<VertexId, VertexId>> edges,
                  const BuildOptions& opts) {
  std::vector<std::pair<VertexId, VertexId>> rows;  // (dst, src)
  rows.reserve(edges.size() * (opts.symmetrize ? 2 : 1) + (opts.add_self_loops ? num_vertices : 0));
  for (auto [src, dst] : edges) {
    if (src >= num_vertices || dst >= num_vertices) {
      throw GraphError("build_graph: vertex id out of range");
    }
    rows.emplace_back(dst, src);
    if (opts.symmetrize && src != dst) rows.emplace_back(src, dst);
  }
  if (opts.add_self_loops) {
    for (VertexId v = 0; v < num_vertices; ++v) rows.emplace_back(v, v);
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());

  std::vector<EdgeIndex> offsets(static_cast<std::size_t>(num_vertices) + 1, 0);
  std::vector<VertexId> targets;
  targets.reserve(rows.size());
  for (auto [dst, src] : rows) {
    ++offsets[dst + 1];
    targets.push_back(src);
  }
  for (std::size_t i = 1; i < offsets.size(); ++i) offsets[i] += offsets[i - 1];
  return Graph(std::move(offsets), std::move(targets));
}

std::vector<VertexId> VertexData::select(const std::vector<std::uint8_t>& mask) {
  std::vector<VertexId> out;
  for (std::size_t v = 0; v < mask.size(); ++v) {
    if (mask[v]) out.push_back(static_cast<VertexId>(v));
  }
  return out;
}

void VertexData::validate(VertexId num_vertices) const {
  if (features.rows() != num_vertices) throw GraphError("vertex data: feature rows != num_vertices");
  if (features.cols() == 0) throw GraphError("vertex data: feat_dim must be > 0");
  if (!features.all_finite()) throw GraphError("vertex data: non-finite feature value");
  if (labels.size() != num_vertices) throw GraphError("vertex data: label count != num_vertices");
  if (train_mask.size() != num_vertices || val_mask.size() != num_vertices ||
      test_mask.size() != num_vertices) {
    throw GraphError("vertex data: mask length != num_vertices");
  }
  for (std::size_t v = 0; v < num_vertices; ++v) {
    if (train_mask[v] + val_mask[v] + test_mask[v] > 1) {
      throw GraphError("vertex data: masks overlap at vertex " + std::to_string(v));
    }
    if (train_mask[v] && (labels[v] < 0 || labels[v] >= num_classes)) {
      throw GraphError("vertex data: train vertex " + std::to_string(v) + " has no valid label");
    }
  }
}

void assign_split_masks(VertexData& data, VertexId num_vertices, std::uint64_t seed) {
  std::vector<VertexId> order(num_vertices);
  for (VertexId v = 0; v < num_vertices; ++v) order[v] = v;
  Rng rng(derive_seed(seed, {0x5EB1u}));
  shuffle_in_place(order, rng);
  const auto n_train = static_cast<std::size_t>(std::floor(0.65 * num_vertices));
  const auto n_test = static_cast<std::size_t>(std::floor(0.10 * num_vertices));
  data.train_mask.assign(num_vertices, 0);
  data.test_mask.assign(num_vertices, 0);
  data.val_mask.assign(num_vertices, 0);
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i < n_train) {
      data.train_mask[order[i]] = 1;
    } else if (i < n_train + n_test) {
      data.test_mask[order[i]] = 1;
    } else {
      data.val_mask[order[i]] = 1;
    }
  }
}

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_bytes(std::uint64_t& h, const void* p, std::size_t n) {
  const auto* b = static_cast<const unsigned char*>(p);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= b[i];
    h *= kFnvPrime;
  }
}

}  // namespace

std::uint64_t fingerprint(const Dataset& ds) {
  std::uint64_t h = kFnvOffset;
  const auto& off = ds.graph.offsets();
  const auto& tgt = ds.graph.targets();
  fnv_bytes(h, off.data(), off.size() * sizeof(EdgeIndex));
  fnv_bytes(h, tgt.data(), tgt.size() * sizeof(VertexId));
  fnv_bytes(h, ds.data.features.data().data(), ds.data.features.size() * sizeof(Real));
  fnv_bytes(h, ds.data.labels.data(), ds.data.labels.size() * sizeof(std::int32_t));
  fnv_bytes(h, ds.data.train_mask.data(), ds.data.train_mask.size());
  return h;
}

}  // namespace hetgnn
