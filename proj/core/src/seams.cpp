#include "uvkit/seams.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

#include "uvkit/error.hpp"

namespace uvkit {

using nlohmann::json;

SeamSet::SeamSet(std::vector<Edge> segments, std::string mesh_id)
    : segments_(std::move(segments)), mesh_id_(std::move(mesh_id)) {
  std::sort(segments_.begin(), segments_.end());
  segments_.erase(std::unique(segments_.begin(), segments_.end()), segments_.end());
}

void SeamSet::insert(Edge e) {
  auto it = std::lower_bound(segments_.begin(), segments_.end(), e);
  if (it == segments_.end() || *it != e) segments_.insert(it, e);
}

bool SeamSet::contains(Edge e) const {
  return std::binary_search(segments_.begin(), segments_.end(), e);
}

void SeamSet::validate(const Mesh& mesh) const {
  const auto incident = edge_faces(mesh.faces);
  for (const Edge& e : segments_) {
    if (e.a == e.b || !incident.contains(e)) {
      throw_input("seam segment (" + std::to_string(e.a) + ", " + std::to_string(e.b) +
                  ") is not an edge of the mesh");
    }
  }
}

int nearest_vertex(const Mesh& mesh, const Vec3& p) {
  if (mesh.vertices.empty()) throw_input("cannot snap to a mesh with no vertices");
  int best = 0;
  double best_d = (mesh.vertices[0] - p).squaredNorm();
  for (int v = 1; v < mesh.num_vertices(); ++v) {
    const double d = (mesh.vertices[v] - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = v;
    }
  }
  return best;
}

std::vector<int> shortest_edge_path(const Mesh& mesh, int from, int to) {
  const int n = mesh.num_vertices();
  const auto neighbors = vertex_neighbors(n, mesh.faces);
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<int> prev(n, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[from] = 0.0;
  queue.emplace(0.0, from);
  while (!queue.empty()) {
    auto [d, v] = queue.top();
    queue.pop();
    if (d > dist[v]) continue;
    if (v == to) break;
    for (int w : neighbors[v]) {
      const double nd = d + (mesh.vertices[w] - mesh.vertices[v]).norm();
      if (nd < dist[w]) {
        dist[w] = nd;
        prev[w] = v;
        queue.emplace(nd, w);
      }
    }
  }
  if (from != to && prev[to] < 0) {
    throw_input("no edge path between vertices " + std::to_string(from) + " and " +
                std::to_string(to));
  }
  std::vector<int> path{to};
  while (path.back() != from) path.push_back(prev[path.back()]);
  std::reverse(path.begin(), path.end());
  return path;
}

namespace {

void add_path(SeamSet& seams, const std::vector<int>& path) {
  for (std::size_t k = 1; k < path.size(); ++k) seams.insert(Edge(path[k - 1], path[k]));
}

}  // namespace

SeamSet snap_polyline(const Mesh& mesh, std::span<const Vec3> polyline) {
  if (polyline.empty()) throw_input("cannot snap an empty polyline");
  if (mesh.vertices.empty()) throw_input("cannot snap to a mesh with no vertices");
  SeamSet seams;
  int prev = nearest_vertex(mesh, polyline[0]);
  for (std::size_t k = 1; k < polyline.size(); ++k) {
    const int v = nearest_vertex(mesh, polyline[k]);
    if (v != prev) add_path(seams, shortest_edge_path(mesh, prev, v));
    prev = v;
  }
  return seams;
}

std::uint32_t quantize(double c, double min, double extent, int bits) {
  if (!(extent > 0.0)) return 0;
  const double levels = static_cast<double>((1u << bits) - 1u);
  const double q = std::round((c - min) / extent * levels);
  return static_cast<std::uint32_t>(std::clamp(q, 0.0, levels));
}

double dequantize(std::uint32_t q, double min, double extent, int bits) {
  const double levels = static_cast<double>((1u << bits) - 1u);
  return min + static_cast<double>(q) / levels * extent;
}

TokenSeq encode_seams(const SeamSet& seams, const Mesh& mesh, int bits) {
  if (bits < 4 || bits > 16) throw_input("token bit width must be in [4, 16], got " + std::to_string(bits));
  seams.validate(mesh);
  TokenSeq seq;
  seq.bits = bits;
  const Aabb3 box = bounding_box(mesh.vertices);
  seq.bbox_min = box.min;
  seq.bbox_extent = box.extent();

  using Point = std::array<std::uint32_t, 3>;
  auto quantize_point = [&](const Vec3& p) {
    Point q;
    for (int axis = 0; axis < 3; ++axis) {
      q[axis] = quantize(p[axis], seq.bbox_min[axis], seq.bbox_extent[axis], bits);
    }
    return q;
  };
  std::vector<std::array<std::uint32_t, 6>> tuples;
  tuples.reserve(seams.size());
  for (const Edge& e : seams.segments()) {
    Point qa = quantize_point(mesh.vertices[e.a]);
    Point qb = quantize_point(mesh.vertices[e.b]);
    if (qb < qa) std::swap(qa, qb);
    tuples.push_back({qa[0], qa[1], qa[2], qb[0], qb[1], qb[2]});
  }
  std::sort(tuples.begin(), tuples.end());
  for (const auto& t : tuples) seq.tokens.insert(seq.tokens.end(), t.begin(), t.end());
  return seq;
}

SeamSet decode_seams(const TokenSeq& seq, const Mesh& mesh) {
  if (!seq.sos || !seq.eos) throw_input("token sequence is missing its SOS/EOS framing");
  if (seq.tokens.size() % 6 != 0) {
    throw_input("token payload length " + std::to_string(seq.tokens.size()) +
                " is not a multiple of 6");
  }
  if (seq.bits < 4 || seq.bits > 16) throw_input("token bit width must be in [4, 16]");
  for (std::uint32_t t : seq.tokens) {
    if (t > seq.max_token()) {
      throw_input("token " + std::to_string(t) + " exceeds the " + std::to_string(seq.bits) +
                  "-bit range");
    }
  }
  SeamSet seams;
  auto point_at = [&](std::size_t offset) {
    Vec3 p;
    for (int axis = 0; axis < 3; ++axis) {
      p[axis] = dequantize(seq.tokens[offset + axis], seq.bbox_min[axis], seq.bbox_extent[axis],
                           seq.bits);
    }
    return p;
  };
  for (std::size_t s = 0; s < seq.tokens.size(); s += 6) {
    const int va = nearest_vertex(mesh, point_at(s));
    const int vb = nearest_vertex(mesh, point_at(s + 3));
    if (va != vb) add_path(seams, shortest_edge_path(mesh, va, vb));
  }
  return seams;
}

// JSON ---------------------------------------------------------------------

namespace {

json read_json_file(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw_input("cannot open '" + path.string() + "'");
  try {
    return json::parse(file);
  } catch (const json::exception& e) {
    throw_input("invalid JSON in '" + path.string() + "': " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw_input("cannot write '" + path.string() + "'");
  file << text;
}

}  // namespace

SeamFile read_seam_file(const std::filesystem::path& path) {
  const json doc = read_json_file(path);
  SeamFile out;
  try {
    if (doc.contains("segments")) {
      for (const auto& seg : doc.at("segments")) {
        if (seg.size() != 2) throw_input("seam segment must have two vertex indices");
        out.segments.emplace_back(seg[0].get<int>(), seg[1].get<int>());
      }
    }
    if (doc.contains("polylines")) {
      for (const auto& line : doc.at("polylines")) {
        std::vector<Vec3> pts;
        for (const auto& p : line) pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
        out.polylines.push_back(std::move(pts));
      }
    }
  } catch (const json::exception& e) {
    throw_input("malformed seam file '" + path.string() + "': " + e.what());
  }
  if (!doc.contains("segments") && !doc.contains("polylines")) {
    throw_input("seam file '" + path.string() + "' has neither 'segments' nor 'polylines'");
  }
  return out;
}

SeamSet resolve_seam_file(const SeamFile& file, const Mesh& mesh) {
  SeamSet seams(file.segments);
  seams.validate(mesh);
  for (const auto& line : file.polylines) {
    for (const Edge& e : snap_polyline(mesh, line).segments()) seams.insert(e);
  }
  return seams;
}

std::string format_seam_json(const SeamSet& seams) {
  json doc;
  doc["segments"] = json::array();
  for (const Edge& e : seams.segments()) doc["segments"].push_back({e.a, e.b});
  return doc.dump(2) + "\n";
}

void write_seam_file(const std::filesystem::path& path, const SeamSet& seams) {
  write_text(path, format_seam_json(seams));
}

std::string format_token_json(const TokenSeq& seq) {
  json doc;
  doc["bits"] = seq.bits;
  doc["bbox"] = {{"min", {seq.bbox_min.x(), seq.bbox_min.y(), seq.bbox_min.z()}},
                 {"extent", {seq.bbox_extent.x(), seq.bbox_extent.y(), seq.bbox_extent.z()}}};
  doc["sos"] = seq.sos;
  doc["eos"] = seq.eos;
  doc["tokens"] = seq.tokens;
  return doc.dump() + "\n";
}

TokenSeq parse_token_json(const std::string& text) {
  TokenSeq seq;
  try {
    const json doc = json::parse(text);
    seq.bits = doc.at("bits").get<int>();
    const auto& box = doc.at("bbox");
    for (int axis = 0; axis < 3; ++axis) {
      seq.bbox_min[axis] = box.at("min").at(axis).get<double>();
      seq.bbox_extent[axis] = box.at("extent").at(axis).get<double>();
    }
    seq.sos = doc.value("sos", true);
    seq.eos = doc.value("eos", true);
    for (const auto& t : doc.at("tokens")) {
      const auto value = t.get<long long>();
      if (value < 0) throw_input("negative token " + std::to_string(value));
      seq.tokens.push_back(static_cast<std::uint32_t>(value));
    }
  } catch (const json::exception& e) {
    throw_input(std::string("malformed token file: ") + e.what());
  }
  return seq;
}

TokenSeq read_token_file(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw_input("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_token_json(buffer.str());
}

void write_token_file(const std::filesystem::path& path, const TokenSeq& tokens) {
  write_text(path, format_token_json(tokens));
}

}  // namespace uvkit
