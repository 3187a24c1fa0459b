#include <algorithm>
#include <cmath>
#include <limits>

#include "uvkit/error.hpp"
#include "uvkit/losses.hpp"

namespace uvkit {

namespace {

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct SegmentDistance {
  double d = 0.0;
  Vec2 d_a = Vec2::Zero();  // ∂d/∂a
  Vec2 d_b = Vec2::Zero();
};

SegmentDistance segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const Vec2 diff = p - (a + t * ab);
  SegmentDistance out;
  out.d = diff.norm();
  if (out.d > 0.0) {
    const Vec2 n = diff / out.d;
    out.d_a = -(1.0 - t) * n;
    out.d_b = -t * n;
  }
  return out;
}

// Inclusive point-in-triangle for either winding.
bool inside_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
  const double d0 = (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
  const double d1 = (c.x() - b.x()) * (p.y() - b.y()) - (c.y() - b.y()) * (p.x() - b.x());
  const double d2 = (a.x() - c.x()) * (p.y() - c.y()) - (a.y() - c.y()) * (p.x() - c.x());
  const bool has_neg = d0 < 0.0 || d1 < 0.0 || d2 < 0.0;
  const bool has_pos = d0 > 0.0 || d1 > 0.0 || d2 > 0.0;
  return !(has_neg && has_pos);
}

}  // namespace

SilhouetteImage rasterize_silhouette(const Chart& chart, std::span<const Vec2> uv, const RasterConfig& cfg,
                                     bool with_grad) {
  if (cfg.resolution < 8) throw_input("silhouette resolution must be at least 8");
  if (uv.size() != chart.positions.size()) throw_input("rasterize_silhouette: uv count mismatch");
  const int res = cfg.resolution;
  const double k = cfg.sharpness;
  SilhouetteImage img;
  img.resolution = res;
  img.sharpness = k;
  img.num_vertices = static_cast<int>(uv.size());
  img.coverage.assign(static_cast<std::size_t>(res) * res, 0.0);
  if (with_grad) img.grad.assign(img.coverage.size(), {});
  if (chart.faces.empty()) return img;

  const double px = 1.0 / res;
  auto centre = [&](int x, int y) { return Vec2((x + 0.5) * px, (y + 0.5) * px); };

  std::vector<unsigned char> inside(img.coverage.size(), 0);
  for (const Face& t : chart.faces) {
    const Vec2& a = uv[t[0]];
    const Vec2& b = uv[t[1]];
    const Vec2& c = uv[t[2]];
    const Vec2 lo = a.cwiseMin(b).cwiseMin(c);
    const Vec2 hi = a.cwiseMax(b).cwiseMax(c);
    const int x0 = std::max(0, static_cast<int>(std::floor(lo.x() * res - 0.5)));
    const int x1 = std::min(res - 1, static_cast<int>(std::ceil(hi.x() * res - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::floor(lo.y() * res - 0.5)));
    const int y1 = std::min(res - 1, static_cast<int>(std::ceil(hi.y() * res - 0.5)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        auto& cell = inside[static_cast<std::size_t>(y) * res + x];
        if (!cell && inside_triangle(centre(x, y), a, b, c)) cell = 1;
      }
    }
  }

  std::vector<std::pair<int, int>> outline;
  for (const auto& loop : chart.boundary_loops) {
    for (std::size_t i = 0; i < loop.size(); ++i) outline.emplace_back(loop[i], loop[(i + 1) % loop.size()]);
  }

  for (int y = 0; y < res; ++y) {
    for (int x = 0; x < res; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * res + x;
      const double sign = inside[idx] ? 1.0 : -1.0;
      if (outline.empty()) {
        img.coverage[idx] = inside[idx] ? 1.0 : 0.0;
        continue;
      }
      const Vec2 p = centre(x, y);
      int best = -1;
      SegmentDistance best_sd;
      best_sd.d = std::numeric_limits<double>::infinity();
      for (std::size_t e = 0; e < outline.size(); ++e) {
        const SegmentDistance sd = segment_distance(p, uv[outline[e].first], uv[outline[e].second]);
        if (sd.d < best_sd.d) {
          best_sd = sd;
          best = static_cast<int>(e);
        }
      }
      const double cov = logistic(k * sign * best_sd.d);
      img.coverage[idx] = cov;
      if (with_grad) {
        const double scale = k * cov * (1.0 - cov) * sign;
        auto& g = img.grad[idx];
        g.va = outline[best].first;
        g.vb = outline[best].second;
        g.d_a = scale * best_sd.d_a;
        g.d_b = scale * best_sd.d_b;
      }
    }
  }
  return img;
}

SilhouetteImage rasterize_silhouette(const UvChart& uv, const RasterConfig& cfg, bool with_grad) {
  return rasterize_silhouette(*uv.chart, uv.uv, cfg, with_grad);
}

}  // namespace uvkit
