#include <gtest/gtest.h>

#include <cmath>

#include "hetgnn/model.hpp"
#include "hetgnn/rng.hpp"
#include "test_util.hpp"

using namespace hetgnn;

namespace {

Block make_block(std::vector<VertexId> dst, std::vector<VertexId> extra,
                 std::vector<std::vector<std::uint32_t>> srcs_per_dst) {
  Block b;
  b.dst_vertices = dst;
  b.src_vertices = dst;
  b.src_vertices.insert(b.src_vertices.end(), extra.begin(), extra.end());
  b.edge_offsets.push_back(0);
  for (auto& s : srcs_per_dst) {
    std::sort(s.begin(), s.end());
    b.edge_src.insert(b.edge_src.end(), s.begin(), s.end());
    b.edge_offsets.push_back(static_cast<std::uint32_t>(b.edge_src.size()));
  }
  return b;
}

DenseMatrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  DenseMatrix m(r, c);
  for (auto& x : m.data()) x = rng.normal();
  return m;
}

// Dense straight-loop oracle for the normalised adjacency.
DenseMatrix dense_gcn_oracle(const Block& b, const DenseMatrix& h, const DenseMatrix& w) {
  const std::size_t nd = b.num_dst(), ns = b.num_src();
  std::vector<std::vector<int>> adj(nd, std::vector<int>(ns, 0));
  for (std::size_t i = 0; i < nd; ++i) {
    for (std::uint32_t e = b.edge_offsets[i]; e < b.edge_offsets[i + 1]; ++e) adj[i][b.edge_src[e]] = 1;
  }
  std::vector<double> deg(ns, 1.0);
  for (std::size_t i = 0; i < nd; ++i) {
    for (std::size_t j = 0; j < ns; ++j) {
      if (adj[i][j] && j != i) {
        deg[i] += 1;
        deg[j] += 1;
      }
    }
  }
  DenseMatrix out(nd, w.cols());
  for (std::size_t i = 0; i < nd; ++i) {
    for (std::size_t c = 0; c < w.cols(); ++c) {
      double acc = 0;
      for (std::size_t j = 0; j < ns; ++j) {
        if (!adj[i][j]) continue;
        const double a = 1.0 / std::sqrt(deg[i] * deg[j]);
        for (std::size_t k = 0; k < h.cols(); ++k) acc += a * h(j, k) * w(k, c);
      }
      out(i, c) = acc;
    }
  }
  return out;
}

DenseMatrix dense_sage_oracle(const Block& b, const DenseMatrix& h, const DenseMatrix& ws,
                              const DenseMatrix& wn) {
  DenseMatrix out(b.num_dst(), ws.cols());
  for (std::size_t i = 0; i < b.num_dst(); ++i) {
    std::vector<std::uint32_t> nb;
    for (std::uint32_t e = b.edge_offsets[i]; e < b.edge_offsets[i + 1]; ++e) {
      if (b.edge_src[e] != i) nb.push_back(b.edge_src[e]);
    }
    for (std::size_t c = 0; c < ws.cols(); ++c) {
      double acc = 0;
      for (std::size_t k = 0; k < h.cols(); ++k) acc += h(i, k) * ws(k, c);
      for (auto j : nb) {
        for (std::size_t k = 0; k < h.cols(); ++k) acc += h(j, k) * wn(k, c) / static_cast<double>(nb.size());
      }
      out(i, c) = acc;
    }
  }
  return out;
}

struct SmallProblem {
  Graph graph;
  SampledBlockStack stack;
  DenseMatrix inputs;
  std::vector<std::int32_t> labels;
};

SmallProblem small_problem(std::size_t layers, std::uint64_t seed) {
  SmallProblem p;
  const auto ds = power_law_fixture(60, seed);
  p.graph = ds.graph;
  const std::vector<VertexId> seeds = {1, 5, 9, 13, 20};
  Fanouts f(layers, 2);
  std::vector<std::uint8_t> hot(60, 0);
  for (VertexId v = 0; v < 60; v += 3) hot[v] = 1;
  p.stack = sample_khop_skip_hot(p.graph, seeds, f, hot, seed);
  p.inputs = random_matrix(p.stack.blocks[0].num_src(), 4, seed + 100);
  for (std::size_t i = 0; i < seeds.size(); ++i) p.labels.push_back(static_cast<std::int32_t>(i % 3));
  return p;
}

}  // namespace

TEST(GcnLayer, SelfLoopOnlyIdentity) {
  const auto b = make_block({0}, {}, {{0}});
  DenseMatrix h(1, 2);
  h(0, 0) = 1;
  const auto out = gcn_layer_forward(b, h, DenseMatrix::identity(2), false);
  EXPECT_EQ(out(0, 0), 1.0);
  EXPECT_EQ(out(0, 1), 0.0);
}

TEST(GcnLayer, TwoVertexSymmetricWeights) {
  const auto b = make_block({0}, {1}, {{0, 1}});
  DenseMatrix h(2, 1, 2.0);
  DenseMatrix w(1, 1, 1.0);
  const auto ew = gcn_edge_weights(b);
  ASSERT_EQ(ew.size(), 2u);
  EXPECT_DOUBLE_EQ(ew[0], 0.5);
  EXPECT_DOUBLE_EQ(ew[1], 0.5);
  const auto out = gcn_layer_forward(b, h, w, false);
  EXPECT_DOUBLE_EQ(out(0, 0), 2.0);
}

TEST(GcnLayer, RandomBlockMatchesDenseOracle) {
  Rng rng(3);
  std::vector<std::vector<std::uint32_t>> srcs(3);
  for (std::uint32_t i = 0; i < 3; ++i) {
    srcs[i].push_back(i);
    for (std::uint32_t j = 0; j < 5; ++j) {
      if (j != i && rng.uniform() < 0.5) srcs[i].push_back(j);
    }
  }
  const auto b = make_block({10, 11, 12}, {13, 14}, srcs);
  const auto h = random_matrix(5, 4, 31);
  const auto w = random_matrix(4, 3, 32);
  const auto got = gcn_layer_forward(b, h, w, false);
  EXPECT_LT(max_abs_diff(got, dense_gcn_oracle(b, h, w)), 1e-10);
}

TEST(GcnLayer, ShapeMismatchNamesLayer) {
  const auto b = make_block({0}, {1}, {{0, 1}});
  try {
    gcn_layer_forward(b, DenseMatrix(3, 2), DenseMatrix(2, 2), false);
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_NE(std::string(e.what()).find("gcn layer"), std::string::npos);
  }
  EXPECT_THROW(gcn_layer_forward(b, DenseMatrix(2, 2), DenseMatrix(3, 2), false), ShapeError);
}

TEST(SageLayer, NoNeighboursGivesZeroNeighbourTerm) {
  const auto b = make_block({0}, {}, {{0}});
  DenseMatrix h(1, 2, 1.0);
  const auto out = sage_layer_forward(b, h, DenseMatrix(2, 2), DenseMatrix::identity(2), false);
  EXPECT_EQ(out(0, 0), 0.0);
  EXPECT_EQ(out(0, 1), 0.0);
}

TEST(SageLayer, SingleNeighbourPassThrough) {
  const auto b = make_block({0}, {1}, {{0, 1}});
  DenseMatrix h(2, 2);
  h(0, 0) = 9;
  h(1, 0) = 3;
  h(1, 1) = -4;
  const auto out = sage_layer_forward(b, h, DenseMatrix(2, 2), DenseMatrix::identity(2), false);
  EXPECT_EQ(out(0, 0), 3.0);
  EXPECT_EQ(out(0, 1), -4.0);
}

TEST(SageLayer, RandomBlockMatchesDenseOracle) {
  Rng rng(4);
  std::vector<std::vector<std::uint32_t>> srcs(3);
  for (std::uint32_t i = 0; i < 3; ++i) {
    srcs[i].push_back(i);
    for (std::uint32_t j = 0; j < 6; ++j) {
      if (j != i && rng.uniform() < 0.5) srcs[i].push_back(j);
    }
  }
  const auto b = make_block({0, 1, 2}, {3, 4, 5}, srcs);
  const auto h = random_matrix(6, 4, 41);
  const auto ws = random_matrix(4, 3, 42);
  const auto wn = random_matrix(4, 3, 43);
  EXPECT_LT(max_abs_diff(sage_layer_forward(b, h, ws, wn, false), dense_sage_oracle(b, h, ws, wn)), 1e-10);
}

TEST(Loss, UniformLogitsGiveLogC) {
  DenseMatrix logits(3, 5, 0.7);
  const auto r = loss_and_grad(logits, {0, 2, 4});
  EXPECT_NEAR(r.loss, std::log(5.0), 1e-12);
}

TEST(Loss, ConfidentCorrectLogitsGiveNearZero) {
  DenseMatrix logits(2, 3, -50.0);
  logits(0, 1) = 50.0;
  logits(1, 2) = 50.0;
  const auto r = loss_and_grad(logits, {1, 2});
  EXPECT_LT(r.loss, 1e-12);
  EXPECT_GE(r.loss, 0.0);
  EXPECT_EQ(r.correct, 2u);
}

TEST(Loss, GradientMatchesFiniteDifference) {
  auto logits = random_matrix(4, 3, 5);
  const std::vector<std::int32_t> y = {0, 2, 1, 1};
  const auto r = loss_and_grad(logits, y);
  const double eps = 1e-6;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    const double orig = logits.data()[k];
    logits.data()[k] = orig + eps;
    const double up = loss_and_grad(logits, y).loss;
    logits.data()[k] = orig - eps;
    const double down = loss_and_grad(logits, y).loss;
    logits.data()[k] = orig;
    const double num = (up - down) / (2 * eps);
    const double ana = r.dlogits.data()[k];
    EXPECT_LT(std::abs(num - ana) / std::max({std::abs(num), std::abs(ana), 1e-8}), 1e-5);
  }
}

TEST(Sgd, ZeroGradientAndZeroLr) {
  auto p = ModelParams::init(ModelKind::kGcn, {3, 2}, 1);
  const auto before = p;
  Gradients zero(1);
  zero[0].w = DenseMatrix(3, 2);
  sgd_step(p, zero, 0.5);
  EXPECT_EQ(p.layers, before.layers);
  EXPECT_EQ(p.version, 1u);
  Gradients g(1);
  g[0].w = random_matrix(3, 2, 9);
  sgd_step(p, g, 0.0);
  EXPECT_EQ(p.layers, before.layers);
  EXPECT_EQ(p.version, 2u);
}

TEST(Sgd, SingleWeightArithmetic) {
  auto p = ModelParams::init(ModelKind::kGcn, {1, 1}, 1);
  p.layers[0].w(0, 0) = 1.0;
  Gradients g(1);
  g[0].w = DenseMatrix(1, 1, 2.0);
  sgd_step(p, g, 0.1);
  EXPECT_DOUBLE_EQ(p.layers[0].w(0, 0), 0.8);
}

TEST(Adam, DecreasesLossOnSmallProblem) {
  auto prob = small_problem(2, 3);
  auto params = ModelParams::init(ModelKind::kGcn, {4, 6, 3}, 1);
  AdamState st;
  const double first = loss_and_grad(forward_batch(prob.stack, prob.inputs, params).logits, prob.labels).loss;
  for (int i = 0; i < 50; ++i) {
    const auto fwd = forward_batch(prob.stack, prob.inputs, params);
    const auto lr = loss_and_grad(fwd.logits, prob.labels);
    adam_step(params, backward_batch(fwd, lr.dlogits, params), 0.01, st);
  }
  const double last = loss_and_grad(forward_batch(prob.stack, prob.inputs, params).logits, prob.labels).loss;
  EXPECT_LT(last, first);
  EXPECT_EQ(params.version, 50u);
}

class GradCheck : public ::testing::TestWithParam<std::tuple<ModelKind, std::size_t, bool>> {};

TEST_P(GradCheck, AnalyticMatchesCentralDifference) {
  const auto [kind, layers, with_hot] = GetParam();
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    auto prob = small_problem(layers, seed);
    std::vector<std::size_t> dims = {4};
    for (std::size_t l = 0; l + 1 < layers; ++l) dims.push_back(5);
    dims.push_back(3);
    const auto params = ModelParams::init(kind, dims, seed);
    ASSERT_LE(params.num_parameters(), 1000u);
    BottomOverride ov;
    DenseMatrix hist;
    if (with_hot) {
      ASSERT_GT(prob.stack.num_hot(), 0u);
      hist = random_matrix(prob.stack.blocks[0].num_dst(), dims[1], seed + 7);
      ov.rows = &prob.stack.hot_flags;
      ov.values = &hist;
    }
    const double err = grad_check(prob.stack, prob.inputs, prob.labels, params, 1e-5, ov);
    EXPECT_LT(err, 1e-4) << "seed " << seed;
  }
}

INSTANTIATE_TEST_SUITE_P(Layers, GradCheck,
                         ::testing::Combine(::testing::Values(ModelKind::kGcn, ModelKind::kSage),
                                            ::testing::Values(std::size_t{1}, std::size_t{2}, std::size_t{3}),
                                            ::testing::Bool()));

TEST(ForwardBatch, RowCountsAndDeterminism) {
  auto prob = small_problem(3, 2);
  const auto params = ModelParams::init(ModelKind::kSage, {4, 5, 5, 3}, 2);
  const auto a = forward_batch(prob.stack, prob.inputs, params);
  const auto b = forward_batch(prob.stack, prob.inputs, params);
  EXPECT_EQ(a.logits, b.logits);
  EXPECT_EQ(a.logits.rows(), prob.stack.seeds().size());
  for (std::size_t l = 0; l < 3; ++l) EXPECT_EQ(a.caches[l].z.rows(), prob.stack.blocks[l].num_dst());
}

TEST(ForwardBatch, ConstantRowsReceiveNoGradient) {
  auto prob = small_problem(2, 4);
  const auto params = ModelParams::init(ModelKind::kGcn, {4, 5, 3}, 4);
  const auto& b0 = prob.stack.blocks[0];
  std::vector<std::uint8_t> all(b0.num_dst(), 1);
  DenseMatrix hist = random_matrix(b0.num_dst(), 5, 1);
  const auto fwd = forward_batch(prob.stack, prob.inputs, params, {&all, &hist});
  const auto lr = loss_and_grad(fwd.logits, prob.labels);
  const auto g = backward_batch(fwd, lr.dlogits, params);
  EXPECT_EQ(g[0].w.max_abs(), 0.0);
  EXPECT_GT(g[1].w.max_abs(), 0.0);
}

TEST(ModelParams, WeightChange) {
  auto a = ModelParams::init(ModelKind::kGcn, {1, 1}, 1);
  auto b = a;
  b.layers[0].w(0, 0) += 0.3;
  EXPECT_NEAR(max_weight_change(a, b), 0.3, 1e-15);
}
