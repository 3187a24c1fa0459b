#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "oracles.hpp"
#include "uvkit/error.hpp"
#include "uvkit/losses.hpp"
#include "uvkit/param.hpp"
#include "uvkit/primitives.hpp"

using namespace uvkit;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const Chart> chart_of(const Mesh& m) {
  return std::make_shared<const Chart>(make_chart(m.vertices, m.faces));
}

std::shared_ptr<const Chart> only_chart(const Mesh& m, const SeamSet& seams) {
  auto charts = cut_along_seams(m, seams);
  EXPECT_EQ(charts.size(), 1u);
  return std::make_shared<const Chart>(std::move(charts.front()));
}

// Similarity taking uv[a] to (0,0) and uv[b] to (1,0).
std::vector<Vec2> pin_frame(std::span<const Vec2> uv, int a, int b) {
  const std::complex<double> za(uv[a].x(), uv[a].y());
  const std::complex<double> zb(uv[b].x(), uv[b].y());
  const std::complex<double> k = 1.0 / (zb - za);
  std::vector<Vec2> out;
  for (const Vec2& p : uv) {
    const std::complex<double> z = (std::complex<double>(p.x(), p.y()) - za) * k;
    out.emplace_back(z.real(), z.imag());
  }
  return out;
}

}  // namespace

TEST(Tutte, SingleTriangleArcLength) {
  Mesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(3, 0, 0), Vec3(0, 4, 0)};
  m.faces = {{0, 1, 2}};
  const auto chart = chart_of(m);
  const UvChart uv = tutte_embed(chart);
  const auto& loop = chart->boundary_loops.at(0);
  ASSERT_EQ(loop.size(), 3u);
  double perimeter = 12.0;
  for (std::size_t k = 0; k < 3; ++k) {
    const int a = loop[k];
    const int b = loop[(k + 1) % 3];
    EXPECT_NEAR(uv.uv[a].norm(), 1.0, 1e-12);
    double turn = std::atan2(uv.uv[b].y(), uv.uv[b].x()) - std::atan2(uv.uv[a].y(), uv.uv[a].x());
    if (turn < 0) turn += 2.0 * kPi;
    const double len = (m.vertices[a] - m.vertices[b]).norm();
    EXPECT_NEAR(turn, 2.0 * kPi * len / perimeter, 1e-12);
  }
}

TEST(Tutte, HexagonCentreIsMean) {
  const auto chart = chart_of(primitives::hexagon_fan());
  const UvChart uv = tutte_embed(chart);
  Vec2 mean = Vec2::Zero();
  for (int v = 1; v <= 6; ++v) mean += uv.uv[v];
  mean /= 6.0;
  EXPECT_NEAR((uv.uv[0] - mean).norm(), 0.0, 1e-12);
}

TEST(Tutte, RandomDisksHaveNoFlips) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int nx = 3 + static_cast<int>(rng.below(8));
    const int ny = 3 + static_cast<int>(rng.below(8));
    const double a = rng.uniform(-0.5, 0.5);
    const auto chart = oracle::grid_chart(
        nx, ny, [&](double x, double y) { return a * std::sin(4 * x) * std::cos(3 * y); }, &rng);
    const UvChart uv = tutte_embed(chart);
    EXPECT_EQ(oracle::orientation_flips(*chart, uv.uv), 0) << "trial " << trial;
  }
}

TEST(Tutte, RejectsNonDisk) {
  const Mesh g = primitives::grid(5, 5);
  auto charts = cut_along_seams(g, SeamSet({{12, 13}, {11, 12}}));
  ASSERT_EQ(charts.size(), 1u);
  EXPECT_THROW((void)tutte_embed(std::make_shared<const Chart>(charts[0])), Error);
}

TEST(Lscm, PlanarChartIsSimilarity) {
  Mesh g = primitives::grid(6, 4, 2.0, 1.0);
  Rng rng(1);
  for (Vec3& p : g.vertices) p += Vec3(0.02 * rng.uniform(-1, 1), 0.02 * rng.uniform(-1, 1), 0.0);
  const auto chart = chart_of(g);
  const auto [a, b] = default_pins(*chart);
  const UvChart uv = lscm(chart, a, b);
  EXPECT_NEAR(uv.uv[a].norm(), 0.0, 1e-12);
  EXPECT_NEAR((uv.uv[b] - Vec2(1, 0)).norm(), 0.0, 1e-12);
  EXPECT_NEAR(distortion_metric(*chart, uv.uv), 0.0, 1e-8);
  const double s = (uv.uv[1] - uv.uv[0]).norm() / (g.vertices[1] - g.vertices[0]).norm();
  for (const Face& t : g.faces) {
    for (int k = 0; k < 3; ++k) {
      const double l3 = (g.vertices[t[k]] - g.vertices[t[(k + 1) % 3]]).norm();
      const double l2 = (uv.uv[t[k]] - uv.uv[t[(k + 1) % 3]]).norm();
      EXPECT_NEAR(l2, s * l3, 1e-9);
    }
  }
}

TEST(Lscm, CylinderUnrollsIsometrically) {
  const int around = 16;
  const int along = 8;
  const Mesh cyl = primitives::open_cylinder(around, along);
  const auto chart = only_chart(cyl, primitives::cylinder_generatrix_seams(around, along));
  const auto [a, b] = default_pins(*chart);
  const UvChart uv = lscm(chart, a, b);
  EXPECT_LE(distortion_metric(*chart, uv.uv), 1e-3);
  // Face-by-face against the analytic unrolling: uv edge lengths equal 3D
  // edge lengths after one global scale.
  double a2 = 0.0;
  for (const Face& t : chart->faces) a2 += std::abs(signed_area(uv.uv[t[0]], uv.uv[t[1]], uv.uv[t[2]]));
  const double s = std::sqrt(chart->surface_area() / a2);
  for (const Face& t : chart->faces) {
    for (int k = 0; k < 3; ++k) {
      const double l3 = (chart->positions[t[k]] - chart->positions[t[(k + 1) % 3]]).norm();
      const double l2 = s * (uv.uv[t[k]] - uv.uv[t[(k + 1) % 3]]).norm();
      EXPECT_NEAR(l2 / l3, 1.0, 1e-3);
    }
  }
  EXPECT_EQ(count_flipped(*chart, uv.uv), 0);
}

TEST(Lscm, HemisphereHasDistortion) {
  const auto chart = chart_of(primitives::hemisphere(16, 6));
  const auto [a, b] = default_pins(*chart);
  EXPECT_GT(distortion_metric(*chart, lscm(chart, a, b).uv), 1e-3);
}

TEST(Lscm, CoincidentPinsFail) {
  const auto chart = chart_of(primitives::grid(3, 3));
  EXPECT_THROW((void)lscm(chart, 0, 0), Error);
}

TEST(Lscm, SimilarityInvariance) {
  const Mesh h = primitives::hemisphere(12, 5);
  const auto chart = chart_of(h);
  const auto [a, b] = default_pins(*chart);
  const double base = distortion_metric(*chart, lscm(chart, a, b).uv);
  const Eigen::Matrix3d r = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
  std::vector<Vec3> moved;
  for (const Vec3& p : h.vertices) moved.push_back(2.5 * (r * p) + Vec3(3, -1, 4));
  const auto moved_chart = std::make_shared<const Chart>(make_chart(moved, h.faces));
  EXPECT_NEAR(distortion_metric(*moved_chart, lscm(moved_chart, a, b).uv), base, 1e-8);
}

TEST(Lscm, EnergyNotAboveTutte) {
  Rng rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    const double amp = rng.uniform(0.1, 0.6);
    const auto chart = oracle::grid_chart(
        7, 6, [&](double x, double y) { return amp * std::sin(3 * x + y); }, &rng);
    const auto [a, b] = default_pins(*chart);
    const double e_lscm = conformal_energy(*chart, lscm(chart, a, b).uv);
    const double e_tutte = conformal_energy(*chart, pin_frame(tutte_embed(chart).uv, a, b));
    EXPECT_LE(e_lscm, e_tutte + 1e-12);
  }
}

TEST(Pins, SquareDiagonal) {
  const auto chart = chart_of(primitives::grid(4, 4));
  const auto [a, b] = default_pins(*chart);
  EXPECT_NEAR((chart->positions[a] - chart->positions[b]).norm(), std::sqrt(2.0), 1e-12);
}

TEST(Pins, TwoBoundaryVertices) {
  Chart c;
  c.positions = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.5, 0.5, 0)};
  c.boundary_loops = {{2, 0}};
  const auto [a, b] = default_pins(c);
  EXPECT_EQ(std::min(a, b), 0);
  EXPECT_EQ(std::max(a, b), 2);
}

TEST(Pins, CubeCrossExhaustive) {
  const auto chart = only_chart(primitives::cube(), primitives::cube_cross_seams());
  double best = 0.0;
  for (const auto& loop : chart->boundary_loops) {
    for (int i : loop) {
      for (int j : loop) best = std::max(best, (chart->positions[i] - chart->positions[j]).norm());
    }
  }
  const auto [a, b] = default_pins(*chart);
  EXPECT_DOUBLE_EQ((chart->positions[a] - chart->positions[b]).norm(), best);
  EXPECT_NEAR(best, std::sqrt(3.0), 1e-12);
}

TEST(Normalize, Examples) {
  EXPECT_EQ(normalize_points(std::vector<Vec2>{Vec2(-1, -1), Vec2(1, 1), Vec2(-1, 1)}),
            (std::vector<Vec2>{Vec2(0, 0), Vec2(1, 1), Vec2(0, 1)}));
  const auto r = normalize_points(std::vector<Vec2>{Vec2(0, 0), Vec2(2, 1)});
  EXPECT_NEAR((r[0] - Vec2(0, 0.25)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((r[1] - Vec2(1, 0.75)).norm(), 0.0, 1e-15);
  EXPECT_THROW((void)normalize_points(std::vector<Vec2>{Vec2(3, 3), Vec2(3, 3)}), Error);
}

TEST(InitialUv, CubeCrossIsNormalizedAndFlipFree) {
  const auto chart = only_chart(primitives::cube(), primitives::cube_cross_seams());
  const InitResult r = initial_uv(chart);
  EXPECT_TRUE(r.uv.normalized);
  for (const Vec2& p : r.uv.uv) {
    EXPECT_GE(p.minCoeff(), 0.0);
    EXPECT_LE(p.maxCoeff(), 1.0);
  }
  EXPECT_EQ(count_flipped(*chart, r.uv.uv), 0);
  EXPECT_LE(distortion_metric(*chart, r.uv.uv), 1e-6);
}

TEST(Arap, DoesNotIncreaseDistortionOnHemisphere) {
  const auto chart = chart_of(primitives::hemisphere(12, 5));
  const InitResult base = initial_uv(chart);
  const InitResult arap = initial_uv(chart, {.arap_iterations = 10});
  EXPECT_EQ(count_flipped(*chart, arap.uv.uv), 0);
  EXPECT_TRUE(std::isfinite(distortion_metric(*chart, arap.uv.uv)));
  EXPECT_NE(base.uv.uv, arap.uv.uv);
}
