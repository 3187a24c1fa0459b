#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "uvkit/model.hpp"
#include "uvkit/primitives.hpp"
#include "uvkit/train.hpp"

using namespace uvkit;
using ad::Matrix;

namespace {

ModelConfig mini_config() {
  ModelConfig c;
  c.embed_uv = 2;
  c.embed_position = 2;
  c.embed_normal = 1;
  c.embed_curvature = 1;
  c.embed_degree = 1;
  c.graph_width = 4;
  c.graph_layers = 2;
  c.heads = 2;
  c.encoder_layers = 1;
  c.ffn_width = 8;
  c.attention_window = 8;
  c.head_init_scale = 1.0;
  return c;
}

Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.uniform(-1.0, 1.0);
  return m;
}

struct Sample {
  std::shared_ptr<const Chart> chart;
  std::vector<Vec2> q;
};

Sample sample(std::uint64_t seed, int nx, int ny) {
  Rng rng(seed);
  const auto cu = fixture::random_chart_uv(rng, nx, ny);
  return {cu.chart, normalize_points(cu.uv)};
}

}  // namespace

TEST(Model, ScaledWidths) {
  const ModelConfig c = ModelConfig::scaled(4);
  EXPECT_EQ(c.embed_uv, 32);
  EXPECT_EQ(c.embed_position, 16);
  EXPECT_EQ(c.embed_normal, 8);
  EXPECT_EQ(c.embed_curvature, 8);
  EXPECT_EQ(c.embed_degree, 8);
  EXPECT_EQ(c.graph_width, 128);
  EXPECT_EQ(c.heads, 4);
  EXPECT_EQ(c.encoder_layers, 2);
  const ModelConfig e = ModelConfig::scaled(8);
  EXPECT_EQ(e.graph_width, 64);
  EXPECT_EQ(e.embed_total(), 16 + 8 + 4 + 4 + 4);
}

TEST(Model, MiniatureIsSmall) {
  EXPECT_LE(init_params(mini_config(), 1).parameter_count(), 500u);
}

TEST(Model, ZeroParamsGiveZeroOffsets) {
  const Sample s = sample(1, 6, 5);
  const FeaturePack pack = make_feature_pack(*s.chart, s.q, {});
  const ForwardResult r = forward(zero_params(ModelConfig::scaled(8)), pack);
  EXPECT_EQ(r.offsets.rows(), s.chart->num_vertices());
  EXPECT_EQ(r.offsets.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Model, OffsetsBounded) {
  const Sample s = sample(2, 6, 6);
  const FeaturePack pack = make_feature_pack(*s.chart, s.q, {});
  RefinerParams p = init_params(ModelConfig::scaled(16), 3);
  for (Matrix& t : p.tensors) t *= 50.0;
  const Matrix off = forward(p, pack).offsets;
  EXPECT_TRUE(off.allFinite());
  EXPECT_LE(off.cwiseAbs().maxCoeff(), 1.0);
}

TEST(Model, PredictionIsInitPlusOffset) {
  const Sample s = sample(3, 5, 5);
  const RefinerParams p = init_params(mini_config(), 4);
  const Matrix off = forward(p, make_feature_pack(*s.chart, s.q, {})).offsets;
  const std::vector<Vec2> pred = predict(p, *s.chart, s.q);
  for (int i = 0; i < s.chart->num_vertices(); ++i) {
    EXPECT_EQ(pred[i].x(), s.q[i].x() + off(i, 0));
    EXPECT_EQ(pred[i].y(), s.q[i].y() + off(i, 1));
  }
}

TEST(Model, TrunkIsPermutationEquivariant) {
  const Sample s = sample(5, 6, 5);
  const Chart& c = *s.chart;
  std::vector<int> perm(c.positions.size());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(6);
  rng.shuffle(perm.begin(), perm.end());
  std::vector<Vec3> pos(perm.size());
  std::vector<Vec2> q(perm.size());
  for (std::size_t v = 0; v < perm.size(); ++v) {
    pos[perm[v]] = c.positions[v];
    q[perm[v]] = s.q[v];
  }
  std::vector<Face> faces;
  for (const Face& t : c.faces) faces.push_back({perm[t[0]], perm[t[1]], perm[t[2]]});
  const Chart pc = make_chart(pos, faces);

  const RefinerParams p = init_params(ModelConfig::scaled(16), 7);
  const Matrix a = trunk_features(p, make_feature_pack(c, s.q, {}));
  const Matrix b = trunk_features(p, make_feature_pack(pc, q, {}));
  for (std::size_t v = 0; v < perm.size(); ++v) {
    EXPECT_LT((a.row(static_cast<Eigen::Index>(v)) - b.row(perm[v])).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Model, BackwardMatchesFiniteDifferencesOnMiniature) {
  const Sample s = sample(8, 5, 4);
  const FeaturePack pack = make_feature_pack(*s.chart, s.q, {});
  Rng rng(9);
  for (int trial = 0; trial < 3; ++trial) {
    const RefinerParams p = init_params(mini_config(), 100 + trial);
    const Matrix g = random_matrix(rng, s.chart->num_vertices(), 2);
    const BackwardResult br = backward(p, pack, g);
    ASSERT_EQ(br.grads.size(), p.tensors.size());
    for (std::size_t k = 0; k < p.tensors.size(); ++k) {
      auto f = [&](const Matrix& x) {
        RefinerParams q = p;
        q.tensors[k] = x;
        return forward(q, pack).offsets.cwiseProduct(g).sum();
      };
      const Matrix fd = oracle::fd_gradient(f, p.tensors[k], 1e-6);
      EXPECT_LT(oracle::max_rel_error(br.grads[k], fd, 1e-6), 1e-3) << p.names[k];
    }
  }
}

TEST(Model, ConstantLossHasZeroGradients) {
  const Sample s = sample(10, 5, 5);
  const RefinerParams p = init_params(mini_config(), 11);
  const BackwardResult br = backward(p, make_feature_pack(*s.chart, s.q, {}),
                                     Matrix::Zero(s.chart->num_vertices(), 2));
  for (const Matrix& g : br.grads) EXPECT_EQ(g.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Model, TinyChartSkipsPyramid) {
  const Chart c = make_chart({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)}, {{0, 1, 2}});
  const std::vector<Vec2> q = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  const RefinerParams p = init_params(mini_config(), 12);
  const FeaturePack pack = make_feature_pack(c, q, {});
  const ForwardResult r = forward(p, pack);
  EXPECT_TRUE(r.pyramid_skipped);
  EXPECT_TRUE(r.offsets.allFinite());
  const Sample s = sample(13, 4, 4);
  EXPECT_FALSE(forward(p, make_feature_pack(*s.chart, s.q, {})).pyramid_skipped);
}

TEST(Model, FeaturePackShape) {
  const Sample s = sample(14, 5, 6);
  const FeaturePack pack = make_feature_pack(*s.chart, s.q, {});
  const int n = s.chart->num_vertices();
  EXPECT_EQ(pack.uv.rows(), n);
  EXPECT_EQ(pack.position.cols(), 3);
  EXPECT_EQ(pack.normal.cols(), 3);
  EXPECT_TRUE(pack.position.allFinite() && pack.degree.allFinite() && pack.curvature.allFinite());
  // Symmetric neighbour graph.
  for (int v = 0; v < n; ++v) {
    for (int u : pack.neighbors[v]) {
      EXPECT_TRUE(std::binary_search(pack.neighbors[u].begin(), pack.neighbors[u].end(), v));
    }
  }
  std::vector<int> order = pack.morton_order;
  std::sort(order.begin(), order.end());
  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  EXPECT_EQ(order, ids);
}

TEST(Model, FeatureStatsZScore) {
  std::vector<std::shared_ptr<const Chart>> charts;
  std::vector<const Chart*> raw;
  for (int i = 0; i < 6; ++i) {
    charts.push_back(sample(20 + i, 5 + i % 3, 5).chart);
    raw.push_back(charts.back().get());
  }
  const FeatureStats st = compute_feature_stats(raw);
  double sum = 0.0, sq = 0.0;
  int n = 0;
  for (const Chart* c : raw) {
    const FeaturePack pack = make_feature_pack(*c, oracle::grid_uv(*c), st);
    for (Eigen::Index i = 0; i < pack.degree.rows(); ++i) {
      sum += pack.degree(i, 0);
      sq += pack.degree(i, 0) * pack.degree(i, 0);
      ++n;
    }
  }
  EXPECT_NEAR(sum / n, 0.0, 0.1);
  EXPECT_NEAR(std::sqrt(sq / n), 1.0, 0.2);
}

TEST(Model, ParamsDeterministicPerSeed) {
  const RefinerParams a = init_params(ModelConfig::scaled(8), 42);
  const RefinerParams b = init_params(ModelConfig::scaled(8), 42);
  const RefinerParams c = init_params(ModelConfig::scaled(8), 43);
  ASSERT_EQ(a.tensors.size(), b.tensors.size());
  bool differs = false;
  for (std::size_t k = 0; k < a.tensors.size(); ++k) {
    EXPECT_EQ(a.tensors[k], b.tensors[k]);
    differs |= a.tensors[k] != c.tensors[k];
  }
  EXPECT_TRUE(differs);
}
