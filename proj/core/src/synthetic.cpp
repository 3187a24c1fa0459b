#include "uvkit/synthetic.hpp"

#include <cmath>

#include "uvkit/error.hpp"
#include "uvkit/primitives.hpp"
#include "uvkit/random.hpp"

namespace uvkit {

namespace {

constexpr int kMaxAttempts = 16;

struct Bump {
  Vec2 centre;
  double amplitude;
  double width;
};

}  // namespace

SyntheticPair make_synthetic_pair(std::uint64_t seed, int n, double warp) {
  if (n < 3) throw_input("synthetic pair: grid must be at least 3×3");
  if (!std::isfinite(warp) || warp < 0.0) throw_input("synthetic pair: warp must be finite and non-negative");
  const Mesh flat = primitives::grid(n, n);
  Rng rng(seed);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::vector<Bump> bumps;
    for (int k = 0; k < 3; ++k) {
      const Vec2 c(rng.uniform(), rng.uniform());
      const double a = rng.uniform(-warp, warp);
      const double w = rng.uniform(0.15, 0.35);
      bumps.push_back({c, a, w});
    }
    std::vector<Vec3> pos = flat.vertices;
    for (Vec3& p : pos) {
      for (const Bump& b : bumps) {
        const double r2 = (p.head<2>() - b.centre).squaredNorm();
        p.z() += b.amplitude * std::exp(-r2 / (2.0 * b.width * b.width));
      }
    }
    bool degenerate = false;
    for (const Face& f : flat.faces) {
      if (triangle_area(pos[f[0]], pos[f[1]], pos[f[2]]) < 1e-12) degenerate = true;
    }
    if (degenerate) continue;
    auto chart = std::make_shared<const Chart>(make_chart(std::move(pos), flat.faces));
    UvChart init;
    try {
      const auto pins = default_pins(*chart);
      init = normalize_uv(lscm(chart, pins.first, pins.second));
    } catch (const Error&) {
      continue;
    }
    if (count_flipped(*chart, init.uv) > 0) continue;
    SyntheticPair pair;
    pair.chart = chart;
    pair.q_init = std::move(init.uv);
    pair.q_gt.reserve(flat.vertices.size());
    for (const Vec3& v : flat.vertices) pair.q_gt.emplace_back(v.x(), v.y());
    return pair;
  }
  throw_numerical("synthetic pair: no valid sample after " + std::to_string(kMaxAttempts) + " draws (seed " +
                  std::to_string(seed) + ")");
}

std::vector<TrainSample> make_synthetic_dataset(int count, std::uint64_t seed, int n_min, int n_max, double warp) {
  if (count < 1) throw_input("synthetic dataset: count must be positive");
  if (n_min < 3 || n_max < n_min) throw_input("synthetic dataset: invalid grid size range");
  Rng rng(seed);
  std::vector<TrainSample> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const int n = n_min + i % (n_max - n_min + 1);
    SyntheticPair p = make_synthetic_pair(rng.next(), n, warp);
    out.push_back({p.chart, std::move(p.q_init), std::move(p.q_gt), "synthetic-" + std::to_string(i)});
  }
  return out;
}

}  // namespace uvkit
