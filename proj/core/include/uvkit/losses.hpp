#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "uvkit/chart.hpp"
#include "uvkit/param.hpp"

namespace uvkit {

// ---------------------------------------------------------------------------
// Rotation alignment
// ---------------------------------------------------------------------------

struct Rotation2 {
  Eigen::Matrix2d m = Eigen::Matrix2d::Identity();

  [[nodiscard]] double angle() const { return std::atan2(m(1, 0), m(0, 0)); }
  [[nodiscard]] Vec2 apply(const Vec2& p) const { return m * p; }
};

struct HornResult {
  Rotation2 rotation;
  bool degenerate = false;  // source points coincide; identity returned
};

/// Proper rotation R minimizing Σ‖R(q_i − q̄) − (p_i − p̄)‖² via the SVD of
/// the 2×2 cross-covariance, with the determinant sign correction.
[[nodiscard]] HornResult horn_align(std::span<const Vec2> q_src, std::span<const Vec2> q_dst);

/// Rotates `q_src` about its centroid by the Horn rotation onto `q_dst`,
/// then rescales into the unit box so it shares the normalized frame of a
/// unit-box ground truth.
[[nodiscard]] std::vector<Vec2> align_to_reference(std::span<const Vec2> q_src,
                                                   std::span<const Vec2> q_dst);

// ---------------------------------------------------------------------------
// Loss terms
// ---------------------------------------------------------------------------

/// Scalar with its gradient with respect to each uv coordinate.
struct LossTerm {
  double value = 0.0;
  std::vector<Vec2> grad;
};

/// Mean per-vertex L1 distance; subgradient 0 at exact ties.
[[nodiscard]] LossTerm recon_loss(std::span<const Vec2> q_pred, std::span<const Vec2> q_gt);

/// Soft coverage image. Pixel (x, y) has centre ((x+½)/res, (y+½)/res);
/// row-major with y as the row.
struct SilhouetteImage {
  struct PixelGrad {
    int va = -1;  // endpoints of the nearest boundary edge; -1 when none
    int vb = -1;
    Vec2 d_a = Vec2::Zero();  // ∂coverage/∂uv[va]
    Vec2 d_b = Vec2::Zero();
  };

  int resolution = 0;
  double sharpness = 0.0;
  int num_vertices = 0;
  std::vector<double> coverage;
  std::vector<PixelGrad> grad;  // empty unless requested

  [[nodiscard]] double at(int x, int y) const { return coverage[static_cast<std::size_t>(y) * resolution + x]; }
};

struct RasterConfig {
  int resolution = 256;
  double sharpness = 30.0;  // per normalized uv unit
};

/// coverage(p) = σ(sharpness · s(p)), where s is the signed distance from the
/// pixel centre to the island outline (positive inside any face).
[[nodiscard]] SilhouetteImage rasterize_silhouette(const Chart& chart, std::span<const Vec2> uv,
                                                   const RasterConfig& cfg, bool with_grad = false);
[[nodiscard]] SilhouetteImage rasterize_silhouette(const UvChart& uv, const RasterConfig& cfg,
                                                   bool with_grad = false);

/// Mean squared pixel difference; the gradient flows through `pred.grad`.
[[nodiscard]] LossTerm silhouette_loss(const SilhouetteImage& pred, const SilhouetteImage& gt);

/// Area-weighted mean of |σ¹ − σ²| of the per-face Jacobian, with
/// analytic gradient. Throws on a zero-area 3D face.
[[nodiscard]] LossTerm distortion_loss(const Chart& chart, std::span<const Vec2> uv);

/// Value of |σ¹ − σ²| for one face and its gradient w.r.t. the face's uvs.
struct FaceDistortion {
  double value = 0.0;
  std::array<Vec2, 3> grad{Vec2::Zero(), Vec2::Zero(), Vec2::Zero()};
  double sigma_max = 0.0;
  double sigma_min = 0.0;
};
[[nodiscard]] FaceDistortion face_distortion(const std::array<Vec3, 3>& p, const std::array<Vec2, 3>& q);

/// Scale-free distortion: uv rescaled so total uv area equals total 3D area
/// before evaluating the area-weighted |σ¹ − σ²| mean.
[[nodiscard]] double distortion_metric(std::span<const std::array<Vec3, 3>> tri3,
                                       std::span<const std::array<Vec2, 3>> tri2);
[[nodiscard]] double distortion_metric(const Chart& chart, std::span<const Vec2> uv);

struct OverlapTerms {
  int count = 0;       // faces with negative signed uv area
  double soft = 0.0;   // hinge surrogate
  std::vector<Vec2> grad;
};

/// Flip count and Σ max(0, margin − A_f) / normalizer. A non-positive
/// normalizer means Σ|A_f| of `uv` itself.
[[nodiscard]] OverlapTerms overlap_terms(const Chart& chart, std::span<const Vec2> uv,
                                         double margin = 1e-6, double normalizer = 0.0);

// ---------------------------------------------------------------------------
// Weighted total
// ---------------------------------------------------------------------------

struct LossWeights {
  double recon = 1.0;
  double silhouette = 1.0;
  double distortion = 1e-4;
  double overlap = 0.01;
};

struct LossOptions {
  LossWeights weights;
  RasterConfig raster{64, 30.0};
  double overlap_margin = 1e-6;
  double overlap_normalizer = 0.0;  // ≤ 0: Σ|A_f| of the ground truth
  const SilhouetteImage* gt_image = nullptr;  // cached ground-truth raster
};

struct LossReport {
  double recon = 0.0;
  double silhouette = 0.0;
  double distortion = 0.0;
  double overlap_soft = 0.0;
  int overlap_count = 0;
  double total = 0.0;
  std::vector<Vec2> grad;  // ∂total/∂uv
};

[[nodiscard]] LossReport total_loss(const Chart& chart, std::span<const Vec2> q_pred,
                                    std::span<const Vec2> q_gt, const LossOptions& opts);

[[nodiscard]] std::string format_loss_report_json(const LossReport& report, const LossWeights& weights);

}  // namespace uvkit
