#pragma once

#include <span>
#include <vector>

#include "uvkit/mesh.hpp"
#include "uvkit/seams.hpp"

namespace uvkit {

/// Connected surface patch cut out of a source mesh.
///
/// `source_vertex[i]` is the mesh vertex chart vertex i was copied from;
/// a seam vertex may have several chart copies. `boundary_loops` are
/// oriented so the chart lies to the left of each directed boundary edge.
struct Chart {
  std::vector<Vec3> positions;
  std::vector<Face> faces;
  std::vector<int> source_vertex;
  std::vector<int> source_face;
  std::vector<std::vector<int>> boundary_loops;

  [[nodiscard]] int num_vertices() const noexcept { return static_cast<int>(positions.size()); }
  [[nodiscard]] int num_faces() const noexcept { return static_cast<int>(faces.size()); }

  /// Single boundary loop and Euler characteristic 1.
  [[nodiscard]] bool is_disk() const;
  [[nodiscard]] int euler_characteristic() const;
  [[nodiscard]] std::vector<bool> boundary_mask() const;
  [[nodiscard]] double surface_area() const;
};

/// Oriented boundary loops of a face set, ordered by smallest vertex id.
[[nodiscard]] std::vector<std::vector<int>> boundary_loops(int num_vertices,
                                                           std::span<const Face> faces);

/// Builds a chart from positions/faces and fills in the boundary loops.
/// Provenance defaults to the identity when left empty.
[[nodiscard]] Chart make_chart(std::vector<Vec3> positions, std::vector<Face> faces,
                               std::vector<int> source_vertex = {},
                               std::vector<int> source_face = {});

/// Duplicates vertices along seams and returns the connected components.
/// Charts are ordered by their smallest source face; faces keep mesh order.
/// Throws if a seam is not a mesh edge or a resulting chart is closed.
[[nodiscard]] std::vector<Chart> cut_along_seams(const Mesh& mesh, const SeamSet& seams);

/// Whole-mesh charts (one per connected component), rejecting closed ones.
[[nodiscard]] std::vector<Chart> charts_without_seams(const Mesh& mesh);

}  // namespace uvkit
