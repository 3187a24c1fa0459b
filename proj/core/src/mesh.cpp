#include "uvkit/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "uvkit/error.hpp"

namespace uvkit {

EdgeFaceMap edge_faces(std::span<const Face> faces) {
  EdgeFaceMap map;
  for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
    const Face& t = faces[f];
    for (int c = 0; c < 3; ++c) {
      map[Edge(t[c], t[(c + 1) % 3])].push_back(f);
    }
  }
  return map;
}

std::vector<std::vector<int>> vertex_neighbors(int num_vertices, std::span<const Face> faces) {
  std::vector<std::set<int>> sets(num_vertices);
  for (const Face& t : faces) {
    for (int c = 0; c < 3; ++c) {
      sets[t[c]].insert(t[(c + 1) % 3]);
      sets[t[(c + 1) % 3]].insert(t[c]);
    }
  }
  std::vector<std::vector<int>> out(num_vertices);
  for (int v = 0; v < num_vertices; ++v) out[v].assign(sets[v].begin(), sets[v].end());
  return out;
}

std::vector<bool> boundary_vertices(int num_vertices, std::span<const Face> faces) {
  std::vector<bool> on_boundary(num_vertices, false);
  for (const auto& [edge, incident] : edge_faces(faces)) {
    if (incident.size() == 1) {
      on_boundary[edge.a] = true;
      on_boundary[edge.b] = true;
    }
  }
  return on_boundary;
}

void validate_mesh(const Mesh& mesh) {
  const int n = mesh.num_vertices();
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& t = mesh.faces[f];
    for (int idx : t) {
      if (idx < 0 || idx >= n) {
        std::ostringstream msg;
        msg << "face " << f << " references vertex " << idx << " but the mesh has " << n
            << " vertices";
        throw_input(msg.str());
      }
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      std::ostringstream msg;
      msg << "face " << f << " is degenerate (" << t[0] << ", " << t[1] << ", " << t[2] << ")";
      throw_input(msg.str());
    }
  }
  for (const auto& [edge, incident] : edge_faces(mesh.faces)) {
    if (incident.size() > 2) {
      std::ostringstream msg;
      msg << "non-manifold edge (" << edge.a << ", " << edge.b << ") shared by "
          << incident.size() << " faces";
      throw_input(msg.str());
    }
  }
  if (mesh.has_uvs()) {
    if (mesh.face_uvs.size() != mesh.faces.size()) {
      throw_input("uv face count does not match face count");
    }
    const int nt = static_cast<int>(mesh.uvs.size());
    for (int f = 0; f < mesh.num_faces(); ++f) {
      for (int idx : mesh.face_uvs[f]) {
        if (idx < 0 || idx >= nt) {
          std::ostringstream msg;
          msg << "face " << f << " references uv " << idx << " but the mesh has " << nt
              << " uvs";
          throw_input(msg.str());
        }
      }
    }
  }
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x()));
}

namespace {

double corner_angle(const Vec3& apex, const Vec3& p, const Vec3& q) {
  const Vec3 u = p - apex;
  const Vec3 v = q - apex;
  // atan2 form stays accurate near 0 and π.
  return std::atan2(u.cross(v).norm(), u.dot(v));
}

}  // namespace

VertexAttributes compute_attributes(std::span<const Vec3> positions, std::span<const Face> faces) {
  const int n = static_cast<int>(positions.size());
  VertexAttributes attr;
  attr.normal.assign(n, Vec3::Zero());
  attr.curvature.assign(n, 0.0);
  std::vector<double> angle_sum(n, 0.0);

  for (const Face& t : faces) {
    const Vec3& a = positions[t[0]];
    const Vec3& b = positions[t[1]];
    const Vec3& c = positions[t[2]];
    // |cross| is twice the area, so summing raw cross products area-weights.
    const Vec3 area_normal = (b - a).cross(c - a);
    for (int k = 0; k < 3; ++k) attr.normal[t[k]] += area_normal;
    angle_sum[t[0]] += corner_angle(a, b, c);
    angle_sum[t[1]] += corner_angle(b, c, a);
    angle_sum[t[2]] += corner_angle(c, a, b);
  }

  const auto neighbors = vertex_neighbors(n, faces);
  const auto boundary = boundary_vertices(n, faces);
  attr.degree.resize(n);
  for (int v = 0; v < n; ++v) {
    attr.degree[v] = static_cast<int>(neighbors[v].size());
    const double total = boundary[v] ? std::numbers::pi : 2.0 * std::numbers::pi;
    attr.curvature[v] = total - angle_sum[v];
    const double len = attr.normal[v].norm();
    if (len > 0.0) {
      attr.normal[v] /= len;
    } else {
      attr.normal[v] = Vec3::UnitZ();
    }
  }
  return attr;
}

VertexAttributes compute_attributes(const Mesh& mesh) {
  return compute_attributes(mesh.vertices, mesh.faces);
}

Aabb3 bounding_box(std::span<const Vec3> points) {
  Aabb3 box;
  if (points.empty()) return box;
  box.min = points.front();
  box.max = points.front();
  for (const Vec3& p : points) {
    box.min = box.min.cwiseMin(p);
    box.max = box.max.cwiseMax(p);
  }
  return box;
}

}  // namespace uvkit
