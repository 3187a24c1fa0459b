#include "uvkit/direct_refine.hpp"

#include <cmath>

#include "uvkit/error.hpp"
#include "uvkit/losses.hpp"

namespace uvkit {

namespace {

Vec2 area_grad(const Vec2& b, const Vec2& c) { return 0.5 * Vec2(b.y() - c.y(), c.x() - b.x()); }

double max_abs(std::span<const Vec2> g) {
  double m = 0.0;
  for (const Vec2& v : g) m = std::max(m, v.cwiseAbs().maxCoeff());
  return m;
}

struct Rank {
  int flipped = 0;
  double value = 0.0;

  bool better_than(const Rank& o) const { return flipped != o.flipped ? flipped < o.flipped : value < o.value; }
};

}  // namespace

RefineObjective refine_objective(const Chart& chart, std::span<const Vec2> uv, const DirectRefineOptions& opts,
                                 double margin, double normalizer, bool with_grad) {
  if (uv.size() != chart.positions.size()) throw_input("direct_refine: uv count does not match chart");
  RefineObjective out;
  out.grad.assign(uv.size(), Vec2::Zero());

  if (opts.distortion != 0.0 && !chart.faces.empty()) {
    const LossTerm raw = distortion_loss(chart, uv);
    const double area3 = chart.surface_area();
    double area2 = 0.0;
    for (const Face& t : chart.faces) area2 += std::abs(signed_area(uv[t[0]], uv[t[1]], uv[t[2]]));
    if (area2 > 0.0) {
      const double s = std::sqrt(area3 / area2);
      out.distortion = s * raw.value;
      if (with_grad) {
        const double w = opts.distortion * s;
        for (std::size_t i = 0; i < uv.size(); ++i) out.grad[i] += w * raw.grad[i];
        // −D/(2·A₂) ∂A₂ from the rescaling factor.
        const double k = -opts.distortion * out.distortion / (2.0 * area2);
        for (const Face& t : chart.faces) {
          const Vec2& a = uv[t[0]];
          const Vec2& b = uv[t[1]];
          const Vec2& c = uv[t[2]];
          const double sg = signed_area(a, b, c) < 0.0 ? -1.0 : 1.0;
          out.grad[t[0]] += k * sg * area_grad(b, c);
          out.grad[t[1]] += k * sg * area_grad(c, a);
          out.grad[t[2]] += k * sg * area_grad(a, b);
        }
      }
    }
  }

  const OverlapTerms ov = overlap_terms(chart, uv, margin, normalizer);
  out.flipped = ov.count;
  out.overlap = ov.soft;
  if (with_grad && opts.overlap != 0.0) {
    for (std::size_t i = 0; i < uv.size(); ++i) out.grad[i] += opts.overlap * ov.grad[i];
  }

  if (opts.boundary != 0.0) {
    std::size_t edges = 0;
    for (const auto& loop : chart.boundary_loops) edges += loop.size();
    if (edges > 0) {
      const double inv = 1.0 / static_cast<double>(edges);
      for (const auto& loop : chart.boundary_loops) {
        for (std::size_t i = 0; i < loop.size(); ++i) {
          const int va = loop[i];
          const int vb = loop[(i + 1) % loop.size()];
          const Vec2 d = uv[vb] - uv[va];
          const double l2 = d.squaredNorm();
          if (!(l2 > 0.0)) continue;
          // sin²(2θ) = (2·dx·dy / L²)².
          const double s = 2.0 * d.x() * d.y() / l2;
          out.boundary += inv * s * s;
          if (with_grad) {
            const double l4 = l2 * l2;
            const Vec2 ds(2.0 * d.y() * (d.y() * d.y() - d.x() * d.x()) / l4,
                          2.0 * d.x() * (d.x() * d.x() - d.y() * d.y()) / l4);
            const Vec2 g = opts.boundary * inv * 2.0 * s * ds;
            out.grad[vb] += g;
            out.grad[va] -= g;
          }
        }
      }
    }
  }

  out.value = opts.distortion * out.distortion + opts.overlap * out.overlap + opts.boundary * out.boundary;
  return out;
}

DirectRefineResult direct_refine(const UvChart& input, const DirectRefineOptions& opts) {
  if (!input.chart) throw_input("direct_refine: uv has no chart");
  if (opts.steps < 0) throw_input("direct_refine: step count must be non-negative");
  if (opts.distortion < 0.0 || opts.overlap < 0.0 || opts.boundary < 0.0)
    throw_input("direct_refine: weights must be non-negative");
  const Chart& chart = *input.chart;

  double normalizer = 0.0;
  for (const Face& t : chart.faces) {
    normalizer += std::abs(signed_area(input.uv[t[0]], input.uv[t[1]], input.uv[t[2]]));
  }
  if (!(normalizer > 0.0)) normalizer = 1.0;
  const double margin =
      chart.faces.empty() ? 0.0 : opts.margin_fraction * normalizer / static_cast<double>(chart.faces.size());

  DirectRefineResult result;
  result.uv = input;
  RefineObjective cur = refine_objective(chart, input.uv, opts, margin, normalizer);
  result.flipped_before = cur.flipped;
  result.objective_before = cur.value;
  result.flipped_after = cur.flipped;
  result.objective_after = cur.value;
  const bool null_objective = opts.distortion == 0.0 && opts.overlap == 0.0 && opts.boundary == 0.0;
  if (null_objective || chart.faces.empty() || opts.steps == 0) return result;

  const double dist_limit = distortion_metric(chart, input.uv) + 1e-6;
  auto valid = [&](const std::vector<Vec2>& uv, int flipped) {
    if (flipped > result.flipped_before) return false;
    if (opts.boundary == 0.0 && distortion_metric(chart, uv) > dist_limit) return false;
    return true;
  };

  double mean_edge = 0.0;
  for (const Face& t : chart.faces) {
    for (int k = 0; k < 3; ++k) mean_edge += (input.uv[t[k]] - input.uv[t[(k + 1) % 3]]).norm();
  }
  mean_edge /= 3.0 * static_cast<double>(chart.faces.size());
  double step = 0.1 * mean_edge;
  const double min_step = 1e-12 * std::max(mean_edge, 1e-300);

  std::vector<Vec2> x = input.uv;
  Rank best{cur.flipped, cur.value};
  std::vector<Vec2> best_uv = input.uv;
  int rejections = 0;
  for (int it = 0; it < opts.steps; ++it) {
    result.steps_taken = it + 1;
    const double gmax = max_abs(cur.grad);
    if (!(gmax > 0.0) || !std::isfinite(gmax)) break;
    std::vector<Vec2> trial(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] - (step / gmax) * cur.grad[i];
    RefineObjective next = refine_objective(chart, trial, opts, margin, normalizer);
    if (std::isfinite(next.value) && next.value < cur.value) {
      x = std::move(trial);
      cur = std::move(next);
      ++result.accepted;
      rejections = 0;
      step *= 1.5;
      const Rank r{cur.flipped, cur.value};
      if (r.better_than(best) && valid(x, cur.flipped)) {
        best = r;
        best_uv = x;
      }
      result.best_history.push_back(cur.value);
    } else {
      step *= 0.5;
      if (++rejections >= opts.max_rejections) {
        result.diverged = true;
        result.warning = "direct_refine: " + std::to_string(rejections) +
                         " consecutive rejected steps; returning best iterate";
        break;
      }
      if (step < min_step) break;
    }
  }

  result.uv = make_uv_chart(input.chart, std::move(best_uv));
  if (input.normalized) result.uv = normalize_uv(result.uv);
  const RefineObjective fin = refine_objective(chart, result.uv.uv, opts, margin, normalizer, false);
  result.flipped_after = fin.flipped;
  result.objective_after = fin.value;
  return result;
}

}  // namespace uvkit
