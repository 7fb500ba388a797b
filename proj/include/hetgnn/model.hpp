#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hetgnn/dense.hpp"
#include "hetgnn/sampler.hpp"

namespace hetgnn {

enum class ModelKind { kGcn, kSage };

std::string to_string(ModelKind k);
ModelKind parse_model_kind(const std::string& s);

// GCN uses `w` only. SAGE uses `w` as W_self and `w_neigh`.
struct LayerParams {
  DenseMatrix w;
  DenseMatrix w_neigh;

  friend bool operator==(const LayerParams&, const LayerParams&) = default;
};

struct ModelParams {
  ModelKind kind = ModelKind::kGcn;
  std::vector<std::size_t> dims;  // [feat_dim, hidden..., num_classes]
  std::vector<LayerParams> layers;
  std::uint64_t version = 0;  // optimizer steps applied

  static ModelParams init(ModelKind kind, std::vector<std::size_t> dims, std::uint64_t seed);
  std::size_t num_layers() const { return layers.size(); }
  std::size_t num_parameters() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

using Gradients = std::vector<LayerParams>;

// Everything a layer's backward needs.
struct LayerCache {
  const Block* block = nullptr;
  DenseMatrix h_in;       // src rows
  DenseMatrix agg;        // gcn: A_hat H_in (dst rows); sage: H_self (dst rows)
  DenseMatrix agg_neigh;  // sage only: mean of non-self neighbours
  DenseMatrix z;          // pre-activation
  bool relu = false;
  std::vector<Real> edge_weight;  // gcn only, aligned with block->edge_src
};

// Symmetric normalisation weights 1/sqrt(d(u) d(v)) over the block's edges,
// aligned with block.edge_src. Degrees are block-local and count the self edge
// once.
std::vector<Real> gcn_edge_weights(const Block& block);

DenseMatrix gcn_layer_forward(const Block& block, const DenseMatrix& h_in, const DenseMatrix& w,
                              bool relu, LayerCache* cache = nullptr);
DenseMatrix sage_layer_forward(const Block& block, const DenseMatrix& h_in, const DenseMatrix& w_self,
                               const DenseMatrix& w_neigh, bool relu, LayerCache* cache = nullptr);

// Returns dL/dH_in (empty when want_input_grad is false); accumulates nothing,
// writes the layer's weight gradients into `grad`.
DenseMatrix layer_backward(ModelKind kind, const LayerCache& cache, const DenseMatrix& d_out,
                           const LayerParams& params, LayerParams& grad, bool want_input_grad);

// Bottom-layer output rows that come from historical embeddings. Rows are
// indexed by blocks[0] dst position; flagged rows are overwritten with
// `values` rows and treated as constants in backward.
struct BottomOverride {
  const std::vector<std::uint8_t>* rows = nullptr;
  const DenseMatrix* values = nullptr;
};

struct ForwardResult {
  DenseMatrix logits;
  std::vector<LayerCache> caches;
  std::vector<std::uint8_t> constant_rows;  // copy of the override mask, may be empty
};

// `inputs` holds one row per blocks[0] src vertex.
ForwardResult forward_batch(const SampledBlockStack& stack, const DenseMatrix& inputs,
                            const ModelParams& params, const BottomOverride& override_rows = {});

// Bottom layer only: one row per block dst vertex. Used for
// historical-embedding precomputation from a parameter snapshot.
DenseMatrix bottom_layer_forward(ModelKind kind, const LayerParams& bottom, bool hidden_activation,
                                 const Block& block, const DenseMatrix& inputs);

struct LossResult {
  Real loss = 0;
  DenseMatrix dlogits;
  std::size_t correct = 0;
};

// Mean softmax cross-entropy over rows.
LossResult loss_and_grad(const DenseMatrix& logits, const std::vector<std::int32_t>& labels);

Gradients backward_batch(const ForwardResult& fwd, const DenseMatrix& dlogits,
                         const ModelParams& params);

void sgd_step(ModelParams& params, const Gradients& grads, Real lr);

struct AdamState {
  Real beta1 = 0.9;
  Real beta2 = 0.999;
  Real eps = 1e-8;
  std::uint64_t t = 0;
  Gradients m;
  Gradients v;
};
void adam_step(ModelParams& params, const Gradients& grads, Real lr, AdamState& state);

// max_l ||W_after - W_before||_inf over all weight matrices.
Real max_weight_change(const ModelParams& before, const ModelParams& after);

// Max relative error between analytic and central-difference gradients of
// the batch loss w.r.t. every weight. rel = |a - n| / max(|a|, |n|, floor).
Real grad_check(const SampledBlockStack& stack, const DenseMatrix& inputs,
                const std::vector<std::int32_t>& labels, const ModelParams& params, Real epsilon,
                const BottomOverride& override_rows = {}, Real floor = 1e-6);

}  // namespace hetgnn
