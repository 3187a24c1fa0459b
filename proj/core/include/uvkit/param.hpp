#pragma once

#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "uvkit/chart.hpp"

namespace uvkit {

/// One uv coordinate per chart vertex.
struct UvChart {
  std::shared_ptr<const Chart> chart;
  std::vector<Vec2> uv;
  bool normalized = false;  // all coordinates in [0,1]²

  [[nodiscard]] int num_vertices() const noexcept { return static_cast<int>(uv.size()); }
};

[[nodiscard]] UvChart make_uv_chart(std::shared_ptr<const Chart> chart, std::vector<Vec2> uv);

/// Uniform-weight Tutte embedding, boundary on the unit circle spaced by 3D
/// arc length. Requires a disk chart.
[[nodiscard]] UvChart tutte_embed(std::shared_ptr<const Chart> chart);

/// Free-boundary least-squares conformal map with `pin_a` at (0,0) and
/// `pin_b` at (1,0).
[[nodiscard]] UvChart lscm(std::shared_ptr<const Chart> chart, int pin_a, int pin_b);

/// Boundary vertex pair with maximal 3D distance. Exhaustive up to 2000
/// boundary vertices, double farthest-point sweep beyond.
[[nodiscard]] std::pair<int, int> default_pins(const Chart& chart);

/// Uniform scale and translation into [0,1]², centred along the shorter axis.
[[nodiscard]] UvChart normalize_uv(const UvChart& uv);
[[nodiscard]] std::vector<Vec2> normalize_points(std::span<const Vec2> uv);

/// Least-squares conformal energy Σ_f |Σ_j W_j U_j|² / (2A_f). Zero iff
/// every face maps by an orientation-preserving similarity.
[[nodiscard]] double conformal_energy(const Chart& chart, std::span<const Vec2> uv);

/// Faces with negative uv signed area.
[[nodiscard]] int count_flipped(const Chart& chart, std::span<const Vec2> uv);

/// Local-global ARAP iterations with cotangent weights, starting from `uv`.
[[nodiscard]] UvChart arap_refine(const UvChart& uv, int iterations);

/// Per-face orthonormal-frame coordinates of the three corners; corner 0 at
/// the origin and corner 1 on the +x axis.
[[nodiscard]] std::array<Vec2, 3> local_frame(const Vec3& a, const Vec3& b, const Vec3& c);

struct InitOptions {
  int arap_iterations = 0;
};

enum class InitMethod { lscm, tutte };

struct InitResult {
  UvChart uv;  // normalized
  InitMethod method = InitMethod::lscm;
};

/// LSCM with default pins, falling back to Tutte when LSCM flips faces or
/// fails; optional ARAP; then normalized.
[[nodiscard]] InitResult initial_uv(std::shared_ptr<const Chart> chart, const InitOptions& opts = {});

}  // namespace uvkit
