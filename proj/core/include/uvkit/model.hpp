#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "uvkit/autodiff.hpp"
#include "uvkit/chart.hpp"

namespace uvkit {

/// Layer widths of the offset refiner. `scaled(d)` divides the reference
/// widths by d; the remaining fields can be set by hand for tiny networks.
struct ModelConfig {
  int width_divisor = 4;
  int embed_uv = 32;
  int embed_position = 16;
  int embed_normal = 8;
  int embed_curvature = 8;
  int embed_degree = 8;
  int graph_width = 128;
  int graph_layers = 5;
  int heads = 4;
  int encoder_layers = 2;
  int ffn_width = 256;
  int attention_window = 1024;  // vertices per attention block, Morton order
  double head_init_scale = 0.1;

  [[nodiscard]] static ModelConfig scaled(int divisor);
  [[nodiscard]] int embed_total() const {
    return embed_uv + embed_position + embed_normal + embed_curvature + embed_degree;
  }
  void validate() const;
};

/// Train-set statistics used to z-score degree and curvature.
struct FeatureStats {
  double degree_mean = 0.0;
  double degree_std = 1.0;
  double curvature_mean = 0.0;
  double curvature_std = 1.0;
};

[[nodiscard]] FeatureStats compute_feature_stats(std::span<const Chart* const> charts);

/// Named dense tensors in a fixed order; index i of `tensors` pairs with
/// `names[i]`.
struct RefinerParams {
  ModelConfig config;
  FeatureStats stats;
  std::vector<std::string> names;
  std::vector<ad::Matrix> tensors;

  [[nodiscard]] std::size_t parameter_count() const;
  [[nodiscard]] bool all_finite() const;
  [[nodiscard]] const ad::Matrix& get(const std::string& name) const;
};

/// Gaussian initialization scaled by 1/sqrt(fan_in); biases zero, layer-norm
/// gains one. The output head is further scaled by `head_init_scale`.
[[nodiscard]] RefinerParams init_params(const ModelConfig& config, std::uint64_t seed,
                                        const FeatureStats& stats = {});

/// Every tensor set to zero (layer-norm gains included).
[[nodiscard]] RefinerParams zero_params(const ModelConfig& config);

/// Network inputs for one chart.
struct FeaturePack {
  ad::Matrix uv;         // N×2 initial uv
  ad::Matrix position;   // N×3, centred, divided by the largest bbox extent
  ad::Matrix normal;     // N×3
  ad::Matrix degree;     // N×1 z-scored
  ad::Matrix curvature;  // N×1 z-scored
  std::vector<std::vector<int>> neighbors;
  std::shared_ptr<const ad::SparseMatrix> mean_adjacency;  // row-normalized
  std::vector<int> morton_order;                            // vertex ids by Morton code of uv

  [[nodiscard]] int num_vertices() const noexcept { return static_cast<int>(uv.rows()); }
};

[[nodiscard]] FeaturePack make_feature_pack(const Chart& chart, std::span<const Vec2> q_init,
                                            const FeatureStats& stats);

/// Vertex order by 32-bit Morton code of the uv quantized over its bounding
/// box; ties broken by vertex id.
[[nodiscard]] std::vector<int> morton_order(std::span<const Vec2> uv);

struct ForwardResult {
  ad::Matrix offsets;            // N×2, components in (−1, 1)
  bool pyramid_skipped = false;  // fewer than 4 vertices
};

[[nodiscard]] ForwardResult forward(const RefinerParams& params, const FeaturePack& pack);

/// Output of the embedding and graph-convolution layers (N × graph_width).
[[nodiscard]] ad::Matrix trunk_features(const RefinerParams& params, const FeaturePack& pack);

struct BackwardResult {
  ForwardResult forward;
  std::vector<ad::Matrix> grads;  // aligned with params.tensors
};

/// Gradients of L given ∂L/∂offsets (N×2). Since Q_pred = Q_i + Q_o this is
/// the uv gradient of the loss.
[[nodiscard]] BackwardResult backward(const RefinerParams& params, const FeaturePack& pack,
                                      const ad::Matrix& d_offsets);

/// Runs the network once, asks `loss_grad` for ∂L/∂offsets given the
/// offsets, then back-propagates on the same tape.
[[nodiscard]] BackwardResult forward_backward(
    const RefinerParams& params, const FeaturePack& pack,
    const std::function<ad::Matrix(const ad::Matrix& offsets)>& loss_grad);

[[nodiscard]] ad::Matrix to_matrix(std::span<const Vec2> pts);
[[nodiscard]] std::vector<Vec2> to_points(const ad::Matrix& m);

}  // namespace uvkit
