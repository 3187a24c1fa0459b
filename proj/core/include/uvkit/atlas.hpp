#pragma once

#include <span>
#include <string>
#include <vector>

#include "uvkit/geometry2d.hpp"
#include "uvkit/param.hpp"

namespace uvkit {

inline constexpr double kDefaultPackMargin = 4.0 / 1024.0;

/// Rotates the island so its axis-aligned bounding box has minimal area
/// (one hull edge lies on an axis), then translates its minimum corner to
/// the origin. Collinear islands are aligned with their principal axis.
[[nodiscard]] UvChart orient_island(const UvChart& uv);

/// Island placement: p' = offset + scale · R · p, R a 90° turn when rotated.
struct PlacedIsland {
  UvChart island;  // input uv, as given to pack
  bool rotated = false;
  double scale = 1.0;
  Vec2 offset = Vec2::Zero();
  std::vector<Vec2> uv;  // transformed coordinates
  Aabb2 cell;            // bounding box inflated by margin/2
};

struct UvAtlas {
  std::vector<PlacedIsland> islands;
  double margin = kDefaultPackMargin;
  double global_scale = 0.0;  // uv length per 3D length

  [[nodiscard]] int num_faces() const;
};

/// Shelf packing of area-proportional islands into [0,1]². Each island is
/// scaled to match its 3D area times one global factor, turned 90° when
/// taller than wide, and placed by decreasing height; the global factor is
/// the largest found by a 32-step bisection.
[[nodiscard]] UvAtlas pack(std::span<const UvChart> islands, double margin = kDefaultPackMargin);

/// Σ island polygon area (unsigned) in the unit square.
[[nodiscard]] double island_area(const UvAtlas& atlas);

/// Utilization with padding strips removed from the available area.
[[nodiscard]] double utilization_margin_excluded(const UvAtlas& atlas);

/// Mesh copy whose uv channel holds the atlas coordinates: one vt per
/// island vertex, faces in mesh order.
[[nodiscard]] Mesh atlas_to_mesh(const Mesh& mesh, const UvAtlas& atlas);

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct MetricsReport {
  double distortion = 0.0;
  double utilization = 0.0;
  double utilization_margin_excluded = 0.0;
  double overlap_pct = 0.0;  // fraction in [0,1]
  int flipped_faces = 0;
  int overlapping_faces = 0;  // flipped or intersecting another face
  int fragments = 0;
  int faces = 0;
};

/// Metrics over the final atlas. Every mesh face must be covered exactly
/// once through island provenance.
[[nodiscard]] MetricsReport compute_metrics(const Mesh& mesh, const UvAtlas& atlas);

/// Metrics for a mesh that already carries uvs (vt/f), islands being the
/// uv-connected face groups.
[[nodiscard]] MetricsReport compute_uv_metrics(const Mesh& mesh);

/// Faces flipped or overlapping another face, shared by both entry points.
[[nodiscard]] std::vector<bool> overlap_faces(std::span<const Tri2> tris, int* flipped = nullptr);

[[nodiscard]] std::string format_metrics_json(const MetricsReport& report);

}  // namespace uvkit
