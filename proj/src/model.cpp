#include "hetgnn/model.hpp"

#include <algorithm>
#include <cmath>

#include "hetgnn/rng.hpp"

namespace hetgnn {

std::string to_string(ModelKind k) { return k == ModelKind::kGcn ? "gcn" : "sage"; }

ModelKind parse_model_kind(const std::string& s) {
  if (s == "gcn") return ModelKind::kGcn;
  if (s == "sage" || s == "graphsage") return ModelKind::kSage;
  throw ConfigError("unknown model '" + s + "' (expected gcn or sage)");
}

ModelParams ModelParams::init(ModelKind kind, std::vector<std::size_t> dims, std::uint64_t seed) {
  if (dims.size() < 2) throw ConfigError("model needs at least one layer");
  for (auto d : dims) {
    if (d == 0) throw ConfigError("model layer dims must be > 0");
  }
  ModelParams p;
  p.kind = kind;
  p.dims = std::move(dims);
  for (std::size_t l = 0; l + 1 < p.dims.size(); ++l) {
    LayerParams lp;
    Rng r0(derive_seed(seed, {0x3E1, l, 0}));
    lp.w = DenseMatrix::glorot(p.dims[l], p.dims[l + 1], r0);
    if (kind == ModelKind::kSage) {
      Rng r1(derive_seed(seed, {0x3E1, l, 1}));
      lp.w_neigh = DenseMatrix::glorot(p.dims[l], p.dims[l + 1], r1);
    }
    p.layers.push_back(std::move(lp));
  }
  return p;
}

std::size_t ModelParams::num_parameters() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.w.size() + l.w_neigh.size();
  return n;
}

std::vector<Real> gcn_edge_weights(const Block& block) {
  std::vector<Real> deg(block.num_src(), 1.0);
  for (std::uint32_t i = 0; i < block.num_dst(); ++i) {
    for (auto s : block.sources_of(i)) {
      if (s == i) continue;
      deg[i] += 1.0;
      deg[s] += 1.0;
    }
  }
  std::vector<Real> w(block.num_edges());
  for (std::uint32_t i = 0; i < block.num_dst(); ++i) {
    for (std::uint32_t e = block.edge_offsets[i]; e < block.edge_offsets[i + 1]; ++e) {
      w[e] = 1.0 / std::sqrt(deg[i] * deg[block.edge_src[e]]);
    }
  }
  return w;
}

namespace {

void apply_relu(DenseMatrix& m) {
  for (Real& x : m.data()) x = x > 0.0 ? x : 0.0;
}

void check_block_input(const Block& block, const DenseMatrix& h_in, const DenseMatrix& w,
                       const char* layer) {
  require_shape(h_in.rows() == block.num_src(),
                std::string(layer) + ": input rows != block src count");
  require_shape(w.rows() == h_in.cols(), std::string(layer) + ": weight input dim != feature dim");
}

void finite_or_throw(const DenseMatrix& m, const char* what) {
  if (!m.all_finite()) throw std::runtime_error(std::string(what) + ": non-finite value");
}

}  // namespace

DenseMatrix gcn_layer_forward(const Block& block, const DenseMatrix& h_in, const DenseMatrix& w,
                              bool relu, LayerCache* cache) {
  check_block_input(block, h_in, w, "gcn layer");
  auto ew = gcn_edge_weights(block);
  const std::size_t f = h_in.cols();
  DenseMatrix agg(block.num_dst(), f);
  for (std::uint32_t i = 0; i < block.num_dst(); ++i) {
    auto out = agg.row(i);
    for (std::uint32_t e = block.edge_offsets[i]; e < block.edge_offsets[i + 1]; ++e) {
      const auto src = h_in.row(block.edge_src[e]);
      const Real a = ew[e];
      for (std::size_t j = 0; j < f; ++j) out[j] += a * src[j];
    }
  }
  DenseMatrix z = matmul(agg, w);
  DenseMatrix h = z;
  if (relu) apply_relu(h);
  finite_or_throw(h, "gcn layer");
  if (cache) {
    cache->block = &block;
    cache->h_in = h_in;
    cache->agg = std::move(agg);
    cache->agg_neigh = {};
    cache->z = std::move(z);
    cache->relu = relu;
    cache->edge_weight = std::move(ew);
  }
  return h;
}

DenseMatrix sage_layer_forward(const Block& block, const DenseMatrix& h_in, const DenseMatrix& w_self,
                               const DenseMatrix& w_neigh, bool relu, LayerCache* cache) {
  check_block_input(block, h_in, w_self, "sage layer");
  require_shape(w_neigh.rows() == w_self.rows() && w_neigh.cols() == w_self.cols(),
                "sage layer: W_self and W_neigh shapes differ");
  const std::size_t f = h_in.cols();
  DenseMatrix self(block.num_dst(), f);
  DenseMatrix mean(block.num_dst(), f);
  for (std::uint32_t i = 0; i < block.num_dst(); ++i) {
    std::copy_n(h_in.row(i).begin(), f, self.row(i).begin());
    auto out = mean.row(i);
    std::size_t cnt = 0;
    for (auto s : block.sources_of(i)) {
      if (s == i) continue;
      const auto src = h_in.row(s);
      for (std::size_t j = 0; j < f; ++j) out[j] += src[j];
      ++cnt;
    }
    if (cnt > 0) {
      const Real inv = 1.0 / static_cast<Real>(cnt);
      for (auto& x : out) x *= inv;
    }
  }
  DenseMatrix z = matmul(self, w_self);
  add_inplace(z, matmul(mean, w_neigh));
  DenseMatrix h = z;
  if (relu) apply_relu(h);
  finite_or_throw(h, "sage layer");
  if (cache) {
    cache->block = &block;
    cache->h_in = h_in;
    cache->agg = std::move(self);
    cache->agg_neigh = std::move(mean);
    cache->z = std::move(z);
    cache->relu = relu;
    cache->edge_weight.clear();
  }
  return h;
}

DenseMatrix layer_backward(ModelKind kind, const LayerCache& cache, const DenseMatrix& d_out,
                           const LayerParams& params, LayerParams& grad, bool want_input_grad) {
  const Block& block = *cache.block;
  require_shape(d_out.rows() == cache.z.rows() && d_out.cols() == cache.z.cols(),
                "layer backward: upstream gradient shape mismatch");
  DenseMatrix dz = d_out;
  if (cache.relu) {
    for (std::size_t k = 0; k < dz.size(); ++k) {
      if (!(cache.z.data()[k] > 0.0)) dz.data()[k] = 0.0;
    }
  }
  const std::size_t f = cache.h_in.cols();
  DenseMatrix d_in;
  if (kind == ModelKind::kGcn) {
    grad.w = matmul_tn(cache.agg, dz);
    grad.w_neigh = {};
    if (!want_input_grad) return d_in;
    DenseMatrix d_agg = matmul_nt(dz, params.w);
    d_in = DenseMatrix(block.num_src(), f);
    for (std::uint32_t i = 0; i < block.num_dst(); ++i) {
      const auto g = d_agg.row(i);
      for (std::uint32_t e = block.edge_offsets[i]; e < block.edge_offsets[i + 1]; ++e) {
        auto dst = d_in.row(block.edge_src[e]);
        const Real a = cache.edge_weight[e];
        for (std::size_t j = 0; j < f; ++j) dst[j] += a * g[j];
      }
    }
    return d_in;
  }
  grad.w = matmul_tn(cache.agg, dz);
  grad.w_neigh = matmul_tn(cache.agg_neigh, dz);
  if (!want_input_grad) return d_in;
  DenseMatrix d_self = matmul_nt(dz, params.w);
  DenseMatrix d_mean = matmul_nt(dz, params.w_neigh);
  d_in = DenseMatrix(block.num_src(), f);
  for (std::uint32_t i = 0; i < block.num_dst(); ++i) {
    auto self_row = d_in.row(i);
    const auto ds = d_self.row(i);
    for (std::size_t j = 0; j < f; ++j) self_row[j] += ds[j];
    const auto srcs = block.sources_of(i);
    std::size_t cnt = 0;
    for (auto s : srcs) cnt += (s != i);
    if (cnt == 0) continue;
    const Real inv = 1.0 / static_cast<Real>(cnt);
    const auto dm = d_mean.row(i);
    for (auto s : srcs) {
      if (s == i) continue;
      auto dst = d_in.row(s);
      for (std::size_t j = 0; j < f; ++j) dst[j] += inv * dm[j];
    }
  }
  return d_in;
}

namespace {

DenseMatrix run_layer(ModelKind kind, const Block& block, const DenseMatrix& h, const LayerParams& lp,
                      bool relu, LayerCache* cache) {
  return kind == ModelKind::kGcn ? gcn_layer_forward(block, h, lp.w, relu, cache)
                                 : sage_layer_forward(block, h, lp.w, lp.w_neigh, relu, cache);
}

}  // namespace

ForwardResult forward_batch(const SampledBlockStack& stack, const DenseMatrix& inputs,
                            const ModelParams& params, const BottomOverride& override_rows) {
  const std::size_t L = params.num_layers();
  require_shape(stack.blocks.size() == L, "forward_batch: stack depth != model layers");
  ForwardResult res;
  res.caches.resize(L);
  DenseMatrix h = inputs;
  for (std::size_t l = 0; l < L; ++l) {
    h = run_layer(params.kind, stack.blocks[l], h, params.layers[l], l + 1 < L, &res.caches[l]);
    if (l == 0 && override_rows.rows != nullptr) {
      const auto& mask = *override_rows.rows;
      require_shape(mask.size() == h.rows(), "forward_batch: override mask size != bottom dst count");
      require_shape(override_rows.values != nullptr && override_rows.values->rows() == h.rows() &&
                        override_rows.values->cols() == h.cols(),
                    "forward_batch: override values shape mismatch");
      for (std::size_t r = 0; r < mask.size(); ++r) {
        if (!mask[r]) continue;
        std::copy_n(override_rows.values->row(r).begin(), h.cols(), h.row(r).begin());
      }
      res.constant_rows = mask;
    }
  }
  res.logits = std::move(h);
  return res;
}

DenseMatrix bottom_layer_forward(ModelKind kind, const LayerParams& bottom, bool hidden_activation,
                                 const Block& block, const DenseMatrix& inputs) {
  return run_layer(kind, block, inputs, bottom, hidden_activation, nullptr);
}

LossResult loss_and_grad(const DenseMatrix& logits, const std::vector<std::int32_t>& labels) {
  require_shape(logits.rows() == labels.size(), "loss: logits rows != label count");
  require_shape(logits.rows() > 0, "loss: empty batch");
  LossResult r;
  r.dlogits = DenseMatrix(logits.rows(), logits.cols());
  const Real inv_n = 1.0 / static_cast<Real>(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto row = logits.row(i);
    const auto y = static_cast<std::size_t>(labels[i]);
    require_shape(y < logits.cols(), "loss: label out of range");
    const Real mx = *std::max_element(row.begin(), row.end());
    Real sum = 0.0;
    for (Real x : row) sum += std::exp(x - mx);
    const Real log_z = mx + std::log(sum);
    r.loss += (log_z - row[y]) * inv_n;
    auto g = r.dlogits.row(i);
    std::size_t arg = 0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      g[c] = std::exp(row[c] - log_z) * inv_n;
      if (row[c] > row[arg]) arg = c;
    }
    g[y] -= inv_n;
    r.correct += (arg == y);
  }
  return r;
}

Gradients backward_batch(const ForwardResult& fwd, const DenseMatrix& dlogits,
                         const ModelParams& params) {
  const std::size_t L = params.num_layers();
  Gradients grads(L);
  DenseMatrix d = dlogits;
  for (std::size_t l = L; l-- > 0;) {
    if (l == 0 && !fwd.constant_rows.empty()) {
      for (std::size_t r = 0; r < fwd.constant_rows.size(); ++r) {
        if (!fwd.constant_rows[r]) continue;
        for (auto& x : d.row(r)) x = 0.0;
      }
    }
    d = layer_backward(params.kind, fwd.caches[l], d, params.layers[l], grads[l], l > 0);
  }
  return grads;
}

void sgd_step(ModelParams& params, const Gradients& grads, Real lr) {
  require_shape(grads.size() == params.num_layers(), "sgd: gradient layer count mismatch");
  for (std::size_t l = 0; l < grads.size(); ++l) {
    auto step = [lr](DenseMatrix& w, const DenseMatrix& g) {
      if (g.empty()) return;
      require_shape(w.size() == g.size(), "sgd: gradient shape mismatch");
      for (std::size_t k = 0; k < w.size(); ++k) w.data()[k] -= lr * g.data()[k];
    };
    step(params.layers[l].w, grads[l].w);
    step(params.layers[l].w_neigh, grads[l].w_neigh);
  }
  ++params.version;
}

void adam_step(ModelParams& params, const Gradients& grads, Real lr, AdamState& st) {
  require_shape(grads.size() == params.num_layers(), "adam: gradient layer count mismatch");
  if (st.m.empty()) {
    st.m.resize(grads.size());
    st.v.resize(grads.size());
    for (std::size_t l = 0; l < grads.size(); ++l) {
      const auto& p = params.layers[l];
      st.m[l].w = DenseMatrix(p.w.rows(), p.w.cols());
      st.v[l].w = DenseMatrix(p.w.rows(), p.w.cols());
      st.m[l].w_neigh = DenseMatrix(p.w_neigh.rows(), p.w_neigh.cols());
      st.v[l].w_neigh = DenseMatrix(p.w_neigh.rows(), p.w_neigh.cols());
    }
  }
  ++st.t;
  const Real c1 = 1.0 - std::pow(st.beta1, static_cast<Real>(st.t));
  const Real c2 = 1.0 - std::pow(st.beta2, static_cast<Real>(st.t));
  auto step = [&](DenseMatrix& w, const DenseMatrix& g, DenseMatrix& m, DenseMatrix& v) {
    if (g.empty()) return;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const Real gk = g.data()[k];
      m.data()[k] = st.beta1 * m.data()[k] + (1.0 - st.beta1) * gk;
      v.data()[k] = st.beta2 * v.data()[k] + (1.0 - st.beta2) * gk * gk;
      w.data()[k] -= lr * (m.data()[k] / c1) / (std::sqrt(v.data()[k] / c2) + st.eps);
    }
  };
  for (std::size_t l = 0; l < grads.size(); ++l) {
    step(params.layers[l].w, grads[l].w, st.m[l].w, st.v[l].w);
    step(params.layers[l].w_neigh, grads[l].w_neigh, st.m[l].w_neigh, st.v[l].w_neigh);
  }
  ++params.version;
}

Real max_weight_change(const ModelParams& before, const ModelParams& after) {
  require_shape(before.num_layers() == after.num_layers(), "weight change: layer count mismatch");
  Real m = 0.0;
  for (std::size_t l = 0; l < before.num_layers(); ++l) {
    m = std::max(m, max_abs_diff(before.layers[l].w, after.layers[l].w));
    if (!before.layers[l].w_neigh.empty()) {
      m = std::max(m, max_abs_diff(before.layers[l].w_neigh, after.layers[l].w_neigh));
    }
  }
  return m;
}

Real grad_check(const SampledBlockStack& stack, const DenseMatrix& inputs,
                const std::vector<std::int32_t>& labels, const ModelParams& params, Real epsilon,
                const BottomOverride& override_rows, Real floor) {
  const auto fwd = forward_batch(stack, inputs, params, override_rows);
  const auto lr = loss_and_grad(fwd.logits, labels);
  const auto grads = backward_batch(fwd, lr.dlogits, params);

  ModelParams probe = params;
  auto loss_at = [&]() {
    return loss_and_grad(forward_batch(stack, inputs, probe, override_rows).logits, labels).loss;
  };
  Real worst = 0.0;
  auto check = [&](DenseMatrix& w, const DenseMatrix& g) {
    for (std::size_t k = 0; k < w.size(); ++k) {
      const Real orig = w.data()[k];
      w.data()[k] = orig + epsilon;
      const Real up = loss_at();
      w.data()[k] = orig - epsilon;
      const Real down = loss_at();
      w.data()[k] = orig;
      const Real numeric = (up - down) / (2.0 * epsilon);
      const Real analytic = g.data()[k];
      const Real denom = std::max({std::abs(analytic), std::abs(numeric), floor});
      worst = std::max(worst, std::abs(analytic - numeric) / denom);
    }
  };
  for (std::size_t l = 0; l < probe.num_layers(); ++l) {
    check(probe.layers[l].w, grads[l].w);
    if (!probe.layers[l].w_neigh.empty()) check(probe.layers[l].w_neigh, grads[l].w_neigh);
  }
  return worst;
}

}  // namespace hetgnn
