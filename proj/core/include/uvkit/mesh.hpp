#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace uvkit {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Face = std::array<int, 3>;

/// Unordered vertex pair, stored with first < second.
struct Edge {
  int a = 0;
  int b = 0;

  Edge() = default;
  Edge(int u, int v) : a(u < v ? u : v), b(u < v ? v : u) {}

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Indexed triangle mesh. Faces are counter-clockwise seen from outside.
///
/// Optional texture coordinates follow the OBJ model: `uvs` is its own
/// index space and `face_uvs[f]` holds the per-corner uv indices of face f.
/// `face_uvs` is either empty or has one entry per face.
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::vector<Vec2> uvs;
  std::vector<Face> face_uvs;

  [[nodiscard]] int num_vertices() const noexcept { return static_cast<int>(vertices.size()); }
  [[nodiscard]] int num_faces() const noexcept { return static_cast<int>(faces.size()); }
  [[nodiscard]] bool has_uvs() const noexcept { return !face_uvs.empty(); }
};

/// Per-vertex features fed to the refiner.
struct VertexAttributes {
  std::vector<Vec3> normal;      // unit length
  std::vector<int> degree;       // number of incident undirected edges
  std::vector<double> curvature; // angle defect in radians
};

/// Edge to incident-face map; faces are listed in increasing id order.
using EdgeFaceMap = std::map<Edge, std::vector<int>>;

[[nodiscard]] EdgeFaceMap edge_faces(std::span<const Face> faces);

/// Sorted neighbour lists of the undirected edge graph.
[[nodiscard]] std::vector<std::vector<int>> vertex_neighbors(int num_vertices,
                                                             std::span<const Face> faces);

/// Marks vertices lying on an edge with exactly one incident face.
[[nodiscard]] std::vector<bool> boundary_vertices(int num_vertices, std::span<const Face> faces);

/// Checks index range, non-degeneracy and edge-manifoldness. Throws on the
/// first violation; the message names the offending face or edge.
void validate_mesh(const Mesh& mesh);

/// Area-weighted unit normals, valence and angle defect. Interior vertices
/// get 2π − Σθ, boundary vertices π − Σθ.
[[nodiscard]] VertexAttributes compute_attributes(std::span<const Vec3> positions,
                                                  std::span<const Face> faces);
[[nodiscard]] VertexAttributes compute_attributes(const Mesh& mesh);

[[nodiscard]] double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);
[[nodiscard]] double signed_area(const Vec2& a, const Vec2& b, const Vec2& c);

struct Aabb3 {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  [[nodiscard]] Vec3 extent() const { return max - min; }
};

[[nodiscard]] Aabb3 bounding_box(std::span<const Vec3> points);

// ---------------------------------------------------------------------------
// Wavefront OBJ
// ---------------------------------------------------------------------------

struct ObjLoadReport {
  int vertices = 0;
  int faces = 0;
  int polygons_split = 0;  // faces with more than three corners
  int dropped_vertices = 0;
};

/// Reads `v`, `vt` and `f` records. Polygons are fan-triangulated from the
/// first corner and unreferenced vertices are dropped. Normals (`vn`) and
/// other records are ignored.
[[nodiscard]] Mesh load_obj(const std::filesystem::path& path, ObjLoadReport* report = nullptr);
[[nodiscard]] Mesh parse_obj(const std::string& text, const std::string& source_name = "<memory>",
                             ObjLoadReport* report = nullptr);

/// Writes `v`, `vt` (when present) and `f` records with 17 significant digits.
void write_obj(const std::filesystem::path& path, const Mesh& mesh);
[[nodiscard]] std::string format_obj(const Mesh& mesh);

}  // namespace uvkit
