#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "uvkit/losses.hpp"
#include "uvkit/model.hpp"

namespace uvkit {

/// One (chart, initial uv, artist uv) triple.
struct TrainSample {
  std::shared_ptr<const Chart> chart;
  std::vector<Vec2> q_init;
  std::vector<Vec2> q_gt;
  std::string id;
};

struct TrainConfig {
  LossWeights weights;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int batch_size = 8;
  int steps = 1000;
  std::uint64_t seed = 0;
  RasterConfig raster{64, 30.0};
  int width_divisor = 4;
  int threads = 1;

  void validate() const;
};

/// Batch means of the loss terms at one step; `overlap_count` is the batch
/// total of flipped faces.
struct HistoryRow {
  int step = 0;
  double recon = 0.0;
  double silhouette = 0.0;
  double distortion = 0.0;
  double overlap_soft = 0.0;
  int overlap_count = 0;
  double total = 0.0;
};

struct TrainResult {
  RefinerParams params;
  std::vector<HistoryRow> history;
};

/// Sample ready for loss evaluation: q_init rotated onto q_gt, cached
/// ground-truth raster and overlap normalizer.
struct PreparedSample {
  const TrainSample* source = nullptr;
  std::vector<Vec2> q_aligned;
  FeaturePack pack;
  SilhouetteImage gt_image;
  double overlap_normalizer = 0.0;
};

[[nodiscard]] PreparedSample prepare_sample(const TrainSample& sample, const FeatureStats& stats,
                                            const RasterConfig& raster);

/// Adam over seeded epoch permutations. Per-sample gradients are reduced in
/// sample order, so results do not depend on `threads`. `model` overrides
/// the widths implied by `config.width_divisor`.
[[nodiscard]] TrainResult train(std::span<const TrainSample> dataset, const TrainConfig& config,
                                const ModelConfig* model = nullptr);

/// Q_pred = q_init + forward offsets.
[[nodiscard]] std::vector<Vec2> predict(const RefinerParams& params, const Chart& chart,
                                        std::span<const Vec2> q_init);

struct EvalSummary {
  double mean_distortion = 0.0;  // distortion_metric of each prediction
  int flipped_faces = 0;
  double mean_total = 0.0;
};

/// Predictions from the aligned initial uv, scored against each sample.
[[nodiscard]] EvalSummary evaluate(const RefinerParams& params, std::span<const TrainSample> samples,
                                   const TrainConfig& config);

void write_history_csv(const std::filesystem::path& path, std::span<const HistoryRow> history);
[[nodiscard]] std::string format_history_csv(std::span<const HistoryRow> history);

/// JSON checkpoint: model config, feature stats, train config and one entry
/// per tensor with its name, shape and row-major values.
void save_checkpoint(const std::filesystem::path& path, const RefinerParams& params, const TrainConfig& config);
[[nodiscard]] std::string format_checkpoint(const RefinerParams& params, const TrainConfig& config);

struct Checkpoint {
  RefinerParams params;
  TrainConfig config;
};
[[nodiscard]] Checkpoint load_checkpoint(const std::filesystem::path& path);
[[nodiscard]] Checkpoint parse_checkpoint(const std::string& text);

}  // namespace uvkit
