#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hetgnn/device_sim.hpp"
#include "hetgnn/model.hpp"
#include "hetgnn/sampler.hpp"

namespace hetgnn {

enum class Strategy { kCase1, kCase2, kCase3, kCase4, kLayerBased };

inline constexpr Strategy kAllStrategies[] = {Strategy::kCase1, Strategy::kCase2, Strategy::kCase3,
                                               Strategy::kCase4, Strategy::kLayerBased};

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& s);
// Strategies that keep a raw-feature cache on the fast device.
bool uses_feature_cache(Strategy s);
// Strategies that sample on the fast device (graph topology resident there).
bool samples_on_fast(Strategy s);

// Reals moved from the slow to the fast side, by kind. Bytes = reals * 8.
struct TransferRecord {
  std::uint64_t raw_feature_reals = 0;
  std::uint64_t hot_embedding_reals = 0;
  std::uint64_t backward_aux_reals = 0;
  std::uint64_t gradient_reals = 0;
  std::uint64_t raw_rows = 0;
  std::uint64_t cached_rows = 0;
  std::uint64_t reused_rows = 0;
  std::uint64_t moved_embeddings = 0;  // reused rows not yet on the fast device this super-batch

  std::uint64_t total_reals() const {
    return raw_feature_reals + hot_embedding_reals + backward_aux_reals + gradient_reals;
  }
  std::uint64_t total_bytes() const { return total_reals() * kRealSize; }
  TransferRecord& operator+=(const TransferRecord& o);
};

// Bottom-layer transfer for one batch.
//  reused_rows: per blocks[0] dst row, 1 if its output comes from a
//    historical embedding (may be empty = none).
//  cached: per vertex id, 1 if its raw feature is resident on the fast device
//    (may be empty = no cache).
// Raw rows are the distinct bottom srcs referenced by non-reused dst rows and
// not cached. Each reused row moves its embedding plus the aggregated
// neighbour representation (emb_dim each), unless emb_resident (per vertex
// id) says an earlier batch of the super-batch already moved it; moved rows
// are marked there.
TransferRecord account_transfer(const Block& bottom, std::span<const std::uint8_t> reused_rows,
                                std::span<const std::uint8_t> cached, std::size_t feat_dim,
                                std::size_t emb_dim, std::vector<std::uint8_t>* emb_resident = nullptr);

// Floating-point work of one layer's forward pass.
double layer_forward_ops(ModelKind kind, std::size_t edges, std::size_t dst, std::size_t fin, std::size_t fout);

// Per-batch work amounts for the simulator, derived from the real stack.
struct BatchWork {
  std::int64_t batch = 0;
  std::int64_t super_batch = 0;
  double sample_edges = 0;       // all layers
  double sample_edges_cold = 0;  // excluding bottom edges of reused rows
  double gather_rows = 0;        // bottom src rows needed
  double cached_rows = 0;        // of which served by the fast-device cache
  double train_ops = 0;          // forward + backward
  TransferRecord transfer;
  std::uint64_t working_set_bytes = 0;  // fast-device activations for this batch
};

// Slow-device Stage-2 work for one super-batch's hot queue.
struct StagingWork {
  std::int64_t super_batch = 0;  // super-batch the embeddings are staged for
  double vertices = 0;
  double sample_edges = 0;
  double gather_rows = 0;
  double compute_ops = 0;
};

struct ModelShape {
  ModelKind kind = ModelKind::kGcn;
  std::vector<std::size_t> dims;  // [feat, hidden..., classes]
  std::size_t feat_dim() const { return dims.front(); }
  std::size_t emb_dim() const { return dims.at(1); }
  std::uint64_t parameter_reals() const;
  std::uint64_t bottom_parameter_reals() const;
};

BatchWork measure_batch(const SampledBlockStack& stack, std::span<const std::uint8_t> reused_rows,
                        std::span<const std::uint8_t> cached, const ModelShape& shape, Strategy strategy,
                        std::int64_t batch, std::int64_t super_batch,
                        std::vector<std::uint8_t>* emb_resident = nullptr);

StagingWork measure_staging(const Block& one_hop, const ModelShape& shape, std::int64_t target_super_batch);

// Slow-device time to stage one hot vertex, given the average one-hop cost.
double staging_seconds(const StagingWork& w, const DeviceSet& d);

struct SkeletonOptions {
  Strategy strategy = Strategy::kCase1;
  bool pipelined = true;
  std::uint64_t n = 1;             // super-batch size (LayerBased)
  std::uint32_t prefetch_depth = 2;  // bounded queue between producer and trainer
  // Fast-device resident memory (graph topology, feature cache, staged
  // embeddings, parameters) and slow-device resident memory.
  std::uint64_t fast_resident_bytes = 0;
  std::uint64_t slow_resident_bytes = 0;
};

// Builds the dependency DAG for a run of batches. Task stages are
// "sample", "gather", "transfer", "cache", "train", "stage2", "sync".
TaskGraph build_skeleton(std::span<const BatchWork> batches, std::span<const StagingWork> staging,
                         const SkeletonOptions& opts);

// "Calibrated" device preset: rates are estimates chosen so that the slow
// device is far slower at dense math and sampling, the link is the
// bottleneck for raw features, and both devices have finite memory.
DeviceSet calibrated_devices();

}  // namespace hetgnn
