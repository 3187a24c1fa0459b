#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uvkit/losses.hpp"
#include "uvkit/param.hpp"

namespace uvkit {

/// Face groups connected through shared uv edges (equal vt index pairs).
/// Groups are ordered by smallest face id. Throws if the mesh has no uvs.
[[nodiscard]] std::vector<std::vector<int>> uv_islands(const Mesh& mesh);

struct IslandRecord {
  int island_id = 0;
  std::string mesh_id;
  std::vector<int> face_ids;  // mesh faces, increasing
  std::shared_ptr<const Chart> chart;
  UvChart artist_uv;
  int vertex_count = 0;
  bool overlapping = false;
  bool fragment = false;
  bool selected = false;
  std::optional<double> ssim;
  std::string reason;  // why the island was not selected
};

/// One record per uv island. Chart vertices are distinct (v, vt) pairs.
[[nodiscard]] std::vector<IslandRecord> split_islands(const Mesh& mesh, const std::string& mesh_id = "");

/// Sets `fragment` (fewer than 5 vertices) and `overlapping` (two faces
/// with intersecting interiors). Idempotent.
[[nodiscard]] IslandRecord flag_filters(IslandRecord record);

inline constexpr int kFragmentVertexLimit = 5;

/// Mean SSIM over all valid 11×11 Gaussian windows (σ = 1.5),
/// C1 = 0.01², C2 = 0.03². Images must share a resolution of at least 16.
[[nodiscard]] double ssim_score(const SilhouetteImage& a, const SilhouetteImage& b);

struct CurateOptions {
  RasterConfig raster{256, 500.0};
  double ssim_low = 0.5;
  double ssim_high = 0.8;
};

/// Whether a flagged record with the given score passes the band filter.
[[nodiscard]] bool in_selection_band(const IslandRecord& r, double ssim, const CurateOptions& opts = {});

/// Re-unwraps each clean island (LSCM, oriented, normalized), compares its
/// silhouette with the oriented, normalized artist layout and sets
/// `selected` per the SSIM band. Records keep their input order.
[[nodiscard]] std::vector<IslandRecord> curate(std::vector<IslandRecord> records, const CurateOptions& opts = {});

/// One JSON object per line.
[[nodiscard]] std::string format_manifest_jsonl(std::span<const IslandRecord> records);

}  // namespace uvkit
