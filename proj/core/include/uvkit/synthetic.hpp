#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "uvkit/train.hpp"

namespace uvkit {

/// Warped grid chart with its conformal unwrap and the straight grid uv.
struct SyntheticPair {
  std::shared_ptr<const Chart> chart;
  std::vector<Vec2> q_init;  // normalized LSCM
  std::vector<Vec2> q_gt;    // (i, j) / (n − 1)
};

/// n × n grid over [0,1]² lifted by three seeded Gaussian bumps with
/// amplitudes in [−warp, warp]. Draws are repeated (at most 16 times) when
/// the unwrap degenerates or flips faces.
[[nodiscard]] SyntheticPair make_synthetic_pair(std::uint64_t seed, int n, double warp);

/// `count` pairs with per-sample seeds derived from `seed`; grid sizes
/// alternate over [n_min, n_max].
[[nodiscard]] std::vector<TrainSample> make_synthetic_dataset(int count, std::uint64_t seed, int n_min, int n_max,
                                                              double warp);

}  // namespace uvkit
