#include "uvkit/chart.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

#include "union_find.hpp"
#include "uvkit/error.hpp"

namespace uvkit {

std::vector<std::vector<int>> boundary_loops(int num_vertices, std::span<const Face> faces) {
  const auto incident = edge_faces(faces);
  // Outgoing boundary half-edges per vertex, in face order.
  std::vector<std::vector<int>> outgoing(num_vertices);
  for (const Face& t : faces) {
    for (int c = 0; c < 3; ++c) {
      const int a = t[c];
      const int b = t[(c + 1) % 3];
      if (incident.at(Edge(a, b)).size() == 1) outgoing[a].push_back(b);
    }
  }
  std::vector<std::size_t> used(num_vertices, 0);
  std::vector<std::vector<int>> loops;
  for (int start = 0; start < num_vertices; ++start) {
    while (used[start] < outgoing[start].size()) {
      std::vector<int> loop;
      int v = start;
      while (used[v] < outgoing[v].size()) {
        loop.push_back(v);
        v = outgoing[v][used[v]++];
        if (v == start) break;
      }
      loops.push_back(std::move(loop));
    }
  }
  return loops;
}

int Chart::euler_characteristic() const {
  std::size_t edges = edge_faces(faces).size();
  return num_vertices() - static_cast<int>(edges) + num_faces();
}

bool Chart::is_disk() const { return boundary_loops.size() == 1 && euler_characteristic() == 1; }

std::vector<bool> Chart::boundary_mask() const {
  std::vector<bool> mask(positions.size(), false);
  for (const auto& loop : boundary_loops) {
    for (int v : loop) mask[v] = true;
  }
  return mask;
}

double Chart::surface_area() const {
  double area = 0.0;
  for (const Face& t : faces) area += triangle_area(positions[t[0]], positions[t[1]], positions[t[2]]);
  return area;
}

Chart make_chart(std::vector<Vec3> positions, std::vector<Face> faces,
                 std::vector<int> source_vertex, std::vector<int> source_face) {
  Chart chart;
  chart.positions = std::move(positions);
  chart.faces = std::move(faces);
  if (source_vertex.empty()) {
    source_vertex.resize(chart.positions.size());
    std::iota(source_vertex.begin(), source_vertex.end(), 0);
  }
  if (source_face.empty()) {
    source_face.resize(chart.faces.size());
    std::iota(source_face.begin(), source_face.end(), 0);
  }
  if (source_vertex.size() != chart.positions.size() || source_face.size() != chart.faces.size()) {
    throw_invariant("chart provenance size does not match geometry");
  }
  chart.source_vertex = std::move(source_vertex);
  chart.source_face = std::move(source_face);
  chart.boundary_loops = boundary_loops(chart.num_vertices(), chart.faces);
  return chart;
}

namespace {

std::vector<Chart> split_components(const Mesh& mesh, const SeamSet& seams) {
  const int nf = mesh.num_faces();
  const auto incident = edge_faces(mesh.faces);

  // Corner (f, c) has id 3f + c. Corners sharing a vertex across an uncut
  // interior edge become one chart vertex.
  detail::UnionFind corners(3 * nf);
  detail::UnionFind components(nf);
  auto corner_of = [&](int f, int v) {
    const Face& t = mesh.faces[f];
    for (int c = 0; c < 3; ++c) {
      if (t[c] == v) return 3 * f + c;
    }
    throw_invariant("vertex not found in face");
  };
  for (const auto& [edge, fs] : incident) {
    if (fs.size() != 2 || seams.contains(edge)) continue;
    components.unite(fs[0], fs[1]);
    corners.unite(corner_of(fs[0], edge.a), corner_of(fs[1], edge.a));
    corners.unite(corner_of(fs[0], edge.b), corner_of(fs[1], edge.b));
  }

  // Components keyed by their smallest face, which is the union-find root.
  std::map<int, std::vector<int>> faces_by_component;
  for (int f = 0; f < nf; ++f) faces_by_component[components.find(f)].push_back(f);

  std::vector<Chart> charts;
  for (const auto& [root, face_ids] : faces_by_component) {
    std::map<int, int> local_of_corner_class;
    std::vector<Vec3> positions;
    std::vector<int> source_vertex;
    std::vector<Face> faces;
    for (int f : face_ids) {
      Face local{};
      for (int c = 0; c < 3; ++c) {
        const int cls = corners.find(3 * f + c);
        auto [it, inserted] = local_of_corner_class.try_emplace(cls, static_cast<int>(positions.size()));
        if (inserted) {
          positions.push_back(mesh.vertices[mesh.faces[f][c]]);
          source_vertex.push_back(mesh.faces[f][c]);
        }
        local[c] = it->second;
      }
      faces.push_back(local);
    }
    charts.push_back(make_chart(std::move(positions), std::move(faces), std::move(source_vertex),
                                face_ids));
  }
  return charts;
}

void reject_closed(const std::vector<Chart>& charts) {
  for (std::size_t k = 0; k < charts.size(); ++k) {
    if (charts[k].faces.empty()) {
      throw_invariant("cutting produced chart " + std::to_string(k) + " with zero faces");
    }
    if (charts[k].boundary_loops.empty()) {
      std::ostringstream msg;
      msg << "chart " << k << " (" << charts[k].num_faces()
          << " faces) is a closed surface with no boundary; it cannot be flattened. "
             "Provide seams that cut it open";
      throw_input(msg.str());
    }
  }
}

}  // namespace

std::vector<Chart> cut_along_seams(const Mesh& mesh, const SeamSet& seams) {
  seams.validate(mesh);
  auto charts = split_components(mesh, seams);
  reject_closed(charts);
  return charts;
}

std::vector<Chart> charts_without_seams(const Mesh& mesh) {
  auto charts = split_components(mesh, SeamSet{});
  reject_closed(charts);
  return charts;
}

}  // namespace uvkit
