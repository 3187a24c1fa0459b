#pragma once

// Randomized inputs shared by the unit and acceptance suites.

#include <memory>
#include <vector>

#include "oracles.hpp"
#include "uvkit/atlas.hpp"
#include "uvkit/losses.hpp"

namespace uvkit::fixture {

struct ChartUv {
  std::shared_ptr<const Chart> chart;
  std::vector<Vec2> uv;
};

/// Warped nx × ny grid chart with random diagonals and a jittered, randomly
/// rotated and scaled uv layout free of flipped faces.
[[nodiscard]] ChartUv random_chart_uv(Rng& rng, int nx, int ny, double jitter = 0.3);

/// True when every face is at least `tol` away from the |σ¹ − σ²| kinks
/// (equal singular values, or a vanishing smaller one).
[[nodiscard]] bool distortion_kink_free(const Chart& chart, std::span<const Vec2> uv, double tol);

/// True when every |Δu|, |Δv| between the two layouts exceeds `tol`.
[[nodiscard]] bool l1_kink_free(std::span<const Vec2> a, std::span<const Vec2> b, double tol);

/// Island for packing: anisotropically scaled warped grid with a jittered
/// layout, oriented and normalized.
[[nodiscard]] UvChart random_island(Rng& rng);

/// Random translation, rotation and uniform scale in [0.5, 2].
[[nodiscard]] std::vector<Vec2> random_similarity(Rng& rng, std::span<const Vec2> uv);

}  // namespace uvkit::fixture
