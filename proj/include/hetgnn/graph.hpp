#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hetgnn/dense.hpp"
#include "hetgnn/types.hpp"

namespace hetgnn {

// CSR adjacency in incoming-neighbour orientation: row v lists N_in(v),
// sorted ascending.
class Graph {
 public:
  Graph() = default;
  Graph(std::vector<EdgeIndex> offsets, std::vector<VertexId> targets);

  VertexId num_vertices() const {
    return offsets_.empty() ? 0 : static_cast<VertexId>(offsets_.size() - 1);
  }
  EdgeIndex num_edges() const { return targets_.size(); }
  std::uint32_t degree(VertexId v) const {
    return static_cast<std::uint32_t>(offsets_[v + 1] - offsets_[v]);
  }
  std::span<const VertexId> in_neighbors(VertexId v) const {
    return {targets_.data() + offsets_[v], degree(v)};
  }
  bool has_self_loop(VertexId v) const;

  const std::vector<EdgeIndex>& offsets() const { return offsets_; }
  const std::vector<VertexId>& targets() const { return targets_; }

  // Throws GraphError if the CSR invariants do not hold.
  void validate() const;

  // Bytes held by the CSR arrays.
  std::size_t topology_bytes() const {
    return offsets_.size() * sizeof(EdgeIndex) + targets_.size() * sizeof(VertexId);
  }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::vector<EdgeIndex> offsets_;
  std::vector<VertexId> targets_;
};

struct BuildOptions {
  bool symmetrize = true;
  bool add_self_loops = true;
};

// Build from directed (src, dst) pairs: dst's row receives src. Duplicates are
// dropped; rows are sorted.
Graph build_graph(VertexId num_vertices, std::span<const std::pair<VertexId, VertexId>> edges,
                  const BuildOptions& opts);

struct VertexData {
  DenseMatrix features;  // num_vertices x feat_dim
  std::vector<std::int32_t> labels;
  std::int32_t num_classes = 0;
  std::vector<std::uint8_t> train_mask;
  std::vector<std::uint8_t> val_mask;
  std::vector<std::uint8_t> test_mask;

  std::size_t feat_dim() const { return features.cols(); }
  std::vector<VertexId> train_vertices() const { return select(train_mask); }
  std::vector<VertexId> val_vertices() const { return select(val_mask); }
  std::vector<VertexId> test_vertices() const { return select(test_mask); }

  void validate(VertexId num_vertices) const;

  friend bool operator==(const VertexData&, const VertexData&) = default;

 private:
  static std::vector<VertexId> select(const std::vector<std::uint8_t>& mask);
};

struct Dataset {
  std::string name;
  Graph graph;
  VertexData data;
};

// Random 65% train / 10% test / 25% validation split.
void assign_split_masks(VertexData& data, VertexId num_vertices, std::uint64_t seed);

struct LoadOptions {
  BuildOptions build;
  std::int32_t num_classes = 8;  // used only when labels are generated
};

// Whitespace-separated "src dst" lines; '#' starts a comment. Optional sidecars
// next to the edge list: <stem>.feat (one row of reals per vertex) and
// <stem>.labels (one class id per line). Missing sidecars are generated from
// `seed`.
Dataset load_edge_list(const std::filesystem::path& path, std::size_t feat_dim, std::uint64_t seed,
                       const LoadOptions& opts = {});

// Writes each stored (neighbour, vertex) pair as "src dst", plus .feat and
// .labels sidecars.
void write_edge_list(const std::filesystem::path& path, const Dataset& ds);

// Versioned binary cache ("HGNNGRAF" magic).
void save_binary(const std::filesystem::path& path, const Dataset& ds);
Dataset load_binary(const std::filesystem::path& path);

enum class GeneratorKind { kSbm, kPowerLaw };

struct GeneratorParams {
  GeneratorKind kind = GeneratorKind::kPowerLaw;
  // sbm
  std::int32_t blocks = 4;
  double p_in = 0.05;
  double p_out = 0.005;
  // power-law (configuration model over a Pareto degree sequence)
  double exponent = 2.5;
  double min_degree = 2.0;
  // features: class centroid * signal + N(0, noise^2)
  double feature_signal = 1.0;
  double feature_noise = 1.0;
};

Dataset synthetic_graph(VertexId num_vertices, const GeneratorParams& params, std::size_t feat_dim,
                        std::int32_t num_classes, std::uint64_t seed);

// FNV-1a over topology, features and labels; identifies a dataset in run
// manifests.
std::uint64_t fingerprint(const Dataset& ds);

}  // namespace hetgnn
