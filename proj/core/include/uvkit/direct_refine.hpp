#pragma once

#include <string>
#include <vector>

#include "uvkit/param.hpp"

namespace uvkit {

/// Weights of the reference-free objective
///   distortion · D + overlap · Σ max(0, m − A_f) / Σ|A⁰_f| + boundary · mean sin²(2θ_e)
/// where D is the scale-free distortion metric, m a margin relative to the
/// mean input face area and θ_e the angle of boundary edge e.
struct DirectRefineOptions {
  double distortion = 1.0;
  double overlap = 100.0;
  double boundary = 0.1;
  int steps = 500;
  double margin_fraction = 0.01;  // m = margin_fraction · mean |A⁰_f|
  int max_rejections = 50;
};

struct DirectRefineResult {
  UvChart uv;
  int steps_taken = 0;
  int accepted = 0;
  int flipped_before = 0;
  int flipped_after = 0;
  double objective_before = 0.0;
  double objective_after = 0.0;
  bool diverged = false;  // stopped after max_rejections consecutive rejections
  std::vector<double> best_history;  // objective after each accepted step (non-increasing)
  std::string warning;
};

/// Adaptive-step gradient descent on the uv coordinates. Returns the best
/// iterate ranked by (flip count, objective) among those that do not add
/// flips and, when the boundary weight is 0, do not raise distortion by
/// more than 1e-6. Normalized input yields normalized output.
[[nodiscard]] DirectRefineResult direct_refine(const UvChart& uv, const DirectRefineOptions& opts = {});

/// Objective value and gradient, exposed for testing.
struct RefineObjective {
  double value = 0.0;
  double distortion = 0.0;
  double overlap = 0.0;
  double boundary = 0.0;
  int flipped = 0;
  std::vector<Vec2> grad;
};

[[nodiscard]] RefineObjective refine_objective(const Chart& chart, std::span<const Vec2> uv,
                                               const DirectRefineOptions& opts, double margin,
                                               double normalizer, bool with_grad = true);

}  // namespace uvkit
