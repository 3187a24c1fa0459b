#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "uvkit/atlas.hpp"
#include "uvkit/dataprep.hpp"
#include "uvkit/error.hpp"
#include "uvkit/losses.hpp"

namespace uvkit {

std::vector<bool> overlap_faces(std::span<const Tri2> tris, int* flipped) {
  std::vector<bool> bad = overlapping_triangles(tris);
  int nflip = 0;
  for (std::size_t i = 0; i < tris.size(); ++i) {
    if (signed_area(tris[i][0], tris[i][1], tris[i][2]) < 0.0) {
      ++nflip;
      bad[i] = true;
    }
  }
  if (flipped) *flipped = nflip;
  return bad;
}

namespace {

void fill_common(MetricsReport& r, std::span<const std::array<Vec3, 3>> tri3, std::span<const Tri2> tri2) {
  r.faces = static_cast<int>(tri2.size());
  r.distortion = distortion_metric(tri3, tri2);
  const auto bad = overlap_faces(tri2, &r.flipped_faces);
  r.overlapping_faces = static_cast<int>(std::count(bad.begin(), bad.end(), true));
  r.overlap_pct = r.faces > 0 ? static_cast<double>(r.overlapping_faces) / r.faces : 0.0;
}

}  // namespace

MetricsReport compute_metrics(const Mesh& mesh, const UvAtlas& atlas) {
  // Validates provenance: every mesh face covered exactly once.
  const Mesh mapped = atlas_to_mesh(mesh, atlas);
  std::vector<std::array<Vec3, 3>> tri3;
  std::vector<Tri2> tri2;
  for (int f = 0; f < mapped.num_faces(); ++f) {
    const Face& t = mapped.faces[f];
    const Face& u = mapped.face_uvs[f];
    tri3.push_back({mapped.vertices[t[0]], mapped.vertices[t[1]], mapped.vertices[t[2]]});
    tri2.push_back({mapped.uvs[u[0]], mapped.uvs[u[1]], mapped.uvs[u[2]]});
  }
  MetricsReport r;
  fill_common(r, tri3, tri2);
  r.utilization = island_area(atlas);
  r.utilization_margin_excluded = utilization_margin_excluded(atlas);
  r.fragments = static_cast<int>(atlas.islands.size());
  return r;
}

MetricsReport compute_uv_metrics(const Mesh& mesh) {
  if (!mesh.has_uvs()) throw_input("metrics: mesh has no texture coordinates");
  std::vector<std::array<Vec3, 3>> tri3;
  std::vector<Tri2> tri2;
  double area = 0.0;
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& t = mesh.faces[f];
    const Face& u = mesh.face_uvs[f];
    tri3.push_back({mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]});
    tri2.push_back({mesh.uvs[u[0]], mesh.uvs[u[1]], mesh.uvs[u[2]]});
    area += std::abs(signed_area(tri2.back()[0], tri2.back()[1], tri2.back()[2]));
  }
  MetricsReport r;
  fill_common(r, tri3, tri2);
  r.utilization = area;
  r.utilization_margin_excluded = area;
  r.fragments = static_cast<int>(uv_islands(mesh).size());
  return r;
}

std::string format_metrics_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["distortion"] = r.distortion;
  j["utilization"] = r.utilization;
  j["utilization_margin_excluded"] = r.utilization_margin_excluded;
  j["overlap_pct"] = r.overlap_pct;
  j["flipped_faces"] = r.flipped_faces;
  j["overlapping_faces"] = r.overlapping_faces;
  j["fragments"] = r.fragments;
  j["faces"] = r.faces;
  return j.dump(2) + "\n";
}

}  // namespace uvkit
