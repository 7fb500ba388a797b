#include <algorithm>
#include <cmath>

#include "hetgnn/graph.hpp"
#include "hetgnn/rng.hpp"
#include "vertex_gen.hpp"

namespace hetgnn {

namespace detail {

DenseMatrix generate_features(const std::vector<std::int32_t>& labels, std::int32_t num_classes,
                              std::size_t feat_dim, double signal, double noise,
                              std::uint64_t seed) {
  Rng crng(derive_seed(seed, {1}));
  DenseMatrix centroids(static_cast<std::size_t>(num_classes), feat_dim);
  for (Real& x : centroids.data()) x = crng.normal();
  DenseMatrix f(labels.size(), feat_dim);
  Rng nrng(derive_seed(seed, {2}));
  for (std::size_t v = 0; v < labels.size(); ++v) {
    const auto c = static_cast<std::size_t>(labels[v]);
    for (std::size_t j = 0; j < feat_dim; ++j) {
      f(v, j) = signal * centroids(c, j) + noise * nrng.normal();
    }
  }
  return f;
}

std::vector<std::int32_t> random_labels(std::size_t n, std::int32_t num_classes,
                                        std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::int32_t> labels(n);
  for (auto& c : labels) c = static_cast<std::int32_t>(rng.below(static_cast<std::uint64_t>(num_classes)));
  return labels;
}

}  // namespace detail

namespace {

using EdgeList = std::vector<std::pair<VertexId, VertexId>>;

// Geometric skipping over candidate pairs (i, j) with j in [lo, hi).
void bernoulli_range(VertexId i, VertexId lo, VertexId hi, double p, Rng& rng, EdgeList& out) {
  if (p <= 0.0 || lo >= hi) return;
  if (p >= 1.0) {
    for (VertexId j = lo; j < hi; ++j) out.emplace_back(i, j);
    return;
  }
  const double log_q = std::log1p(-p);
  double j = static_cast<double>(lo) - 1.0;
  for (;;) {
    double u = rng.uniform();
    while (u <= 0.0) u = rng.uniform();
    j += 1.0 + std::floor(std::log(u) / log_q);
    if (j >= static_cast<double>(hi)) break;
    out.emplace_back(i, static_cast<VertexId>(j));
  }
}

Dataset make_sbm(VertexId n, const GeneratorParams& p, std::size_t feat_dim,
                 std::int32_t num_classes, std::uint64_t seed) {
  if (p.blocks < 1 || static_cast<VertexId>(p.blocks) > n) {
    throw GraphError("sbm: blocks must be in [1, num_vertices]");
  }
  if (!(p.p_in >= 0.0 && p.p_in <= 1.0 && p.p_out >= 0.0 && p.p_out <= 1.0)) {
    throw GraphError("sbm: probabilities must be in [0, 1]");
  }
  if (num_classes != p.blocks) throw GraphError("sbm: num_classes must equal the block count");

  const auto blocks = static_cast<VertexId>(p.blocks);
  std::vector<VertexId> block_start(blocks + 1);
  for (VertexId b = 0; b <= blocks; ++b) {
    block_start[b] = static_cast<VertexId>((static_cast<std::uint64_t>(b) * n) / blocks);
  }
  std::vector<std::int32_t> labels(n);
  for (VertexId b = 0; b < blocks; ++b) {
    for (VertexId v = block_start[b]; v < block_start[b + 1]; ++v) labels[v] = static_cast<std::int32_t>(b);
  }

  EdgeList edges;
  for (VertexId i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, {0x5B3, i}));
    const auto bi = static_cast<VertexId>(labels[i]);
    for (VertexId b = 0; b < blocks; ++b) {
      const VertexId lo = std::max(block_start[b], i + 1);
      bernoulli_range(i, lo, block_start[b + 1], b == bi ? p.p_in : p.p_out, rng, edges);
    }
  }

  Dataset ds;
  ds.name = "sbm";
  ds.graph = build_graph(n, edges, BuildOptions{});
  ds.data.labels = std::move(labels);
  ds.data.num_classes = num_classes;
  ds.data.features = detail::generate_features(ds.data.labels, num_classes, feat_dim,
                                               p.feature_signal, p.feature_noise,
                                               derive_seed(seed, {0xFEA7}));
  return ds;
}

// Configuration model over a Pareto degree sequence with tail exponent
// `exponent` (P(k) ~ k^-exponent). Multi-edges and self-pairs are dropped.
Dataset make_power_law(VertexId n, const GeneratorParams& p, std::size_t feat_dim,
                       std::int32_t num_classes, std::uint64_t seed) {
  if (!(p.exponent > 1.0)) throw GraphError("power-law: exponent must be > 1");
  if (!(p.min_degree >= 1.0)) throw GraphError("power-law: min_degree must be >= 1");
  if (num_classes < 1) throw GraphError("power-law: num_classes must be >= 1");

  Rng rng(derive_seed(seed, {0x9A4}));
  const double inv = -1.0 / (p.exponent - 1.0);
  std::vector<VertexId> stubs;
  for (VertexId v = 0; v < n; ++v) {
    const double u = rng.uniform();
    double d = std::floor(p.min_degree * std::pow(1.0 - u, inv));
    d = std::min(d, static_cast<double>(n - 1));
    for (std::uint32_t k = 0; k < static_cast<std::uint32_t>(d); ++k) stubs.push_back(v);
  }
  shuffle_in_place(stubs, rng);
  EdgeList edges;
  edges.reserve(stubs.size() / 2);
  for (std::size_t i = 0; i + 1 < stubs.size(); i += 2) {
    if (stubs[i] != stubs[i + 1]) edges.emplace_back(stubs[i], stubs[i + 1]);
  }

  Dataset ds;
  ds.name = "power-law";
  ds.graph = build_graph(n, edges, BuildOptions{});
  ds.data.num_classes = num_classes;
  ds.data.labels = detail::random_labels(n, num_classes, derive_seed(seed, {0x1AB}));
  ds.data.features = detail::generate_features(ds.data.labels, num_classes, feat_dim,
                                               p.feature_signal, p.feature_noise,
                                               derive_seed(seed, {0xFEA7}));
  return ds;
}

}  // namespace

Dataset synthetic_graph(VertexId num_vertices, const GeneratorParams& params, std::size_t feat_dim,
                        std::int32_t num_classes, std::uint64_t seed) {
  if (num_vertices < 2) throw GraphError("synthetic_graph: num_vertices must be >= 2");
  if (feat_dim == 0) throw GraphError("synthetic_graph: feat_dim must be > 0");
  Dataset ds = params.kind == GeneratorKind::kSbm
                   ? make_sbm(num_vertices, params, feat_dim, num_classes, seed)
                   : make_power_law(num_vertices, params, feat_dim, num_classes, seed);
  assign_split_masks(ds.data, num_vertices, seed);
  ds.data.validate(num_vertices);
  return ds;
}

}  // namespace hetgnn
