#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "uvkit/atlas.hpp"
#include "uvkit/dataprep.hpp"
#include "uvkit/direct_refine.hpp"
#include "uvkit/train.hpp"

namespace uvkit {

enum class RefineMode { off, direct, model };

[[nodiscard]] RefineMode parse_refine_mode(const std::string& s);
[[nodiscard]] std::string to_string(RefineMode m);

struct PipelineConfig {
  std::filesystem::path input;
  std::string seams = "none";  // seam JSON path, or "none" for whole-mesh charts
  LossWeights weights;
  RasterConfig raster{256, 30.0};
  RefineMode refine = RefineMode::off;
  std::filesystem::path checkpoint;  // refine = model
  DirectRefineOptions direct;
  int arap_iterations = 0;
  double margin = kDefaultPackMargin;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
  int threads = 0;  // 0: hardware concurrency
  bool write_silhouettes = true;
  int preview_resolution = 512;

  void validate() const;
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct ChartSummary {
  int chart = 0;
  int faces = 0;
  int vertices = 0;
  std::string init;  // "lscm" or "tutte"
  int flipped_init = 0;
  int flipped_final = 0;
  double distortion_init = 0.0;
  double distortion_final = 0.0;
  bool pyramid_skipped = false;
  std::string warning;
};

struct UnwrapResult {
  MetricsReport metrics;
  std::vector<ChartSummary> charts;
  std::vector<StageTiming> timings;
  Mesh output;  // input geometry with atlas uvs
  UvAtlas atlas;
};

/// load → cut → per-chart init → optional refine → orient → pack → metrics.
/// Writes unwrapped.obj, atlas.png, silhouettes/chart_NNNN.png,
/// metrics.json, charts.json and timings.json under `output_dir`. Timings
/// are kept out of metrics.json so reports are byte-stable across runs.
[[nodiscard]] UnwrapResult run_unwrap(const PipelineConfig& config);

/// Training data source: synthetic warped grids, or a curated manifest
/// whose selected islands are loaded from their source OBJ files.
struct DatasetConfig {
  int synthetic_count = 16;
  std::uint64_t synthetic_seed = 0;
  int grid_min = 6;
  int grid_max = 10;
  double warp = 0.3;
  std::filesystem::path manifest;  // takes precedence when set
};

struct TrainJob {
  DatasetConfig dataset;
  TrainConfig train;
  std::filesystem::path output_dir = "out";
};

/// Writes checkpoint.json and history.csv; returns the training result.
[[nodiscard]] TrainResult run_train(const TrainJob& job);

[[nodiscard]] std::vector<TrainSample> load_dataset(const DatasetConfig& config);

/// Geometry from `mesh_path`, uvs from `uv_path`; face counts must agree.
[[nodiscard]] MetricsReport run_metrics(const std::filesystem::path& mesh_path,
                                        const std::filesystem::path& uv_path);

/// Re-packs the uv islands of an OBJ that already has uvs.
[[nodiscard]] UvAtlas run_pack(const Mesh& mesh, double margin, Mesh* output = nullptr);

/// Curation over OBJ files (directories are scanned for *.obj, sorted).
[[nodiscard]] std::vector<IslandRecord> run_curate(const std::vector<std::filesystem::path>& inputs,
                                                   const CurateOptions& opts, int threads = 1);

/// Runs body(i) for i in [0, n) on up to `threads` workers; the first
/// exception (lowest index) is rethrown after all workers finish.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

[[nodiscard]] int resolve_threads(int requested);

// Config files -------------------------------------------------------------

/// Fields absent from the JSON keep the values already in `config`.
void apply_pipeline_json(const std::string& text, PipelineConfig& config);
void apply_train_json(const std::string& text, TrainJob& job);

[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace uvkit
