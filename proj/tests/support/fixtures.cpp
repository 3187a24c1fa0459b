#include "fixtures.hpp"

#include <cmath>
#include <numbers>

namespace uvkit::fixture {

ChartUv random_chart_uv(Rng& rng, int nx, int ny, double jitter) {
  const double amp = rng.uniform(-0.6, 0.6);
  const double fx = rng.uniform(1.0, 4.0);
  const double fy = rng.uniform(1.0, 4.0);
  ChartUv out;
  out.chart = oracle::grid_chart(
      nx, ny, [&](double x, double y) { return amp * std::sin(fx * x) * std::cos(fy * y); }, &rng);
  for (int attempt = 0;; ++attempt) {
    std::vector<Vec2> uv = oracle::jittered_grid_uv(*out.chart, nx, ny, jitter, rng);
    for (Vec2& p : uv) p += Vec2(0.02 * rng.uniform(-1, 1), 0.02 * rng.uniform(-1, 1));
    if (oracle::orientation_flips(*out.chart, uv) == 0 || attempt > 50) {
      out.uv = random_similarity(rng, uv);
      return out;
    }
  }
}

bool distortion_kink_free(const Chart& chart, std::span<const Vec2> uv, double tol) {
  for (const Face& t : chart.faces) {
    const FaceDistortion fd = face_distortion({chart.positions[t[0]], chart.positions[t[1]], chart.positions[t[2]]},
                                              {uv[t[0]], uv[t[1]], uv[t[2]]});
    if (fd.sigma_max - fd.sigma_min < tol || fd.sigma_min < tol) return false;
  }
  return true;
}

bool l1_kink_free(std::span<const Vec2> a, std::span<const Vec2> b, double tol) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] - b[i]).cwiseAbs().minCoeff() < tol) return false;
  }
  return true;
}

std::vector<Vec2> random_similarity(Rng& rng, std::span<const Vec2> uv) {
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double s = rng.uniform(0.5, 2.0);
  const Vec2 t(rng.uniform(-1, 1), rng.uniform(-1, 1));
  const Eigen::Matrix2d r = Eigen::Rotation2Dd(angle).toRotationMatrix();
  std::vector<Vec2> out;
  out.reserve(uv.size());
  for (const Vec2& p : uv) out.push_back(s * (r * p) + t);
  return out;
}

UvChart random_island(Rng& rng) {
  const int nx = 3 + static_cast<int>(rng.below(4));
  const int ny = 3 + static_cast<int>(rng.below(4));
  const double sx = rng.uniform(0.2, 3.0);
  const double sy = rng.uniform(0.2, 3.0);
  const double amp = rng.uniform(0.0, 0.3);
  const auto base = oracle::grid_chart(nx, ny, [&](double x, double y) { return amp * x * y; }, &rng);
  std::vector<Vec3> pos = base->positions;
  for (Vec3& p : pos) p = Vec3(sx * p.x(), sy * p.y(), p.z());
  auto chart = std::make_shared<const Chart>(make_chart(pos, base->faces));
  std::vector<Vec2> uv = oracle::jittered_grid_uv(*chart, nx, ny, 0.2, rng);
  for (Vec2& p : uv) p = Vec2(sx * p.x(), sy * p.y());
  uv = random_similarity(rng, uv);
  return normalize_uv(orient_island(make_uv_chart(chart, uv)));
}

}  // namespace uvkit::fixture
