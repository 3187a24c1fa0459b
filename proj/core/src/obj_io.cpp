#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "uvkit/error.hpp"
#include "uvkit/mesh.hpp"

namespace uvkit {

namespace {

struct Corner {
  int v = -1;
  int vt = -1;
};

// Resolves a 1-based (or negative, relative) OBJ index to 0-based.
int resolve_index(long long raw, std::size_t count, const std::string& where) {
  long long idx = raw > 0 ? raw - 1 : static_cast<long long>(count) + raw;
  if (raw == 0 || idx < 0 || idx >= static_cast<long long>(count)) {
    throw_input(where + ": index " + std::to_string(raw) + " out of range (have " +
                std::to_string(count) + ")");
  }
  return static_cast<int>(idx);
}

long long parse_int(std::string_view s, const std::string& where) {
  long long value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw_input(where + ": malformed index '" + std::string(s) + "'");
  }
  return value;
}

}  // namespace

Mesh parse_obj(const std::string& text, const std::string& source_name, ObjLoadReport* report) {
  std::vector<Vec3> positions;
  std::vector<Vec2> texcoords;
  std::vector<std::vector<Corner>> polygons;
  std::vector<int> polygon_lines;

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    const std::string where = source_name + ":" + std::to_string(line_no);
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x() >> p.y() >> p.z())) throw_input(where + ": malformed vertex");
      positions.push_back(p);
    } else if (tag == "vt") {
      Vec2 t;
      if (!(ls >> t.x() >> t.y())) throw_input(where + ": malformed texture coordinate");
      texcoords.push_back(t);
    } else if (tag == "f") {
      std::vector<Corner> poly;
      std::string tok;
      while (ls >> tok) {
        Corner c;
        const auto s1 = tok.find('/');
        c.v = resolve_index(parse_int(std::string_view(tok).substr(0, s1), where),
                            positions.size(), where);
        if (s1 != std::string::npos) {
          const auto s2 = tok.find('/', s1 + 1);
          const auto vt_text = std::string_view(tok).substr(
              s1 + 1, s2 == std::string::npos ? std::string::npos : s2 - s1 - 1);
          if (!vt_text.empty()) {
            c.vt = resolve_index(parse_int(vt_text, where), texcoords.size(), where);
          }
        }
        poly.push_back(c);
      }
      if (poly.size() < 3) throw_input(where + ": face with fewer than 3 corners");
      polygons.push_back(std::move(poly));
      polygon_lines.push_back(line_no);
    }
  }

  ObjLoadReport rep;
  bool any_uv = false;
  bool all_uv = true;
  for (const auto& poly : polygons) {
    for (const Corner& c : poly) {
      any_uv = any_uv || c.vt >= 0;
      all_uv = all_uv && c.vt >= 0;
    }
  }
  if (any_uv && !all_uv) {
    throw_input(source_name + ": faces mix 'v' and 'v/vt' corner forms");
  }

  // Fan triangulation from the first corner, in original indices.
  std::vector<Face> tri_v;
  std::vector<Face> tri_vt;
  std::vector<int> tri_line;
  for (std::size_t p = 0; p < polygons.size(); ++p) {
    const auto& poly = polygons[p];
    if (poly.size() > 3) ++rep.polygons_split;
    for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
      tri_v.push_back({poly[0].v, poly[k].v, poly[k + 1].v});
      if (any_uv) tri_vt.push_back({poly[0].vt, poly[k].vt, poly[k + 1].vt});
      tri_line.push_back(polygon_lines[p]);
    }
  }

  for (std::size_t f = 0; f < tri_v.size(); ++f) {
    const Face& t = tri_v[f];
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      throw_input(source_name + ":" + std::to_string(tri_line[f]) +
                  ": degenerate face repeats a vertex");
    }
  }
  for (const auto& [edge, incident] : edge_faces(tri_v)) {
    if (incident.size() > 2) {
      std::ostringstream msg;
      msg << source_name << ": non-manifold edge (" << edge.a + 1 << ", " << edge.b + 1
          << ") shared by " << incident.size() << " faces";
      throw_input(msg.str());
    }
  }

  // Drop unreferenced vertices, keeping the original relative order.
  std::vector<int> remap(positions.size(), -1);
  for (const Face& t : tri_v) {
    for (int v : t) remap[v] = 0;
  }
  Mesh mesh;
  for (std::size_t v = 0; v < positions.size(); ++v) {
    if (remap[v] == 0) {
      remap[v] = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back(positions[v]);
    } else {
      ++rep.dropped_vertices;
    }
  }
  mesh.faces.reserve(tri_v.size());
  for (const Face& t : tri_v) mesh.faces.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});

  if (any_uv) {
    std::vector<int> uv_remap(texcoords.size(), -1);
    for (const Face& t : tri_vt) {
      for (int vt : t) uv_remap[vt] = 0;
    }
    for (std::size_t i = 0; i < texcoords.size(); ++i) {
      if (uv_remap[i] == 0) {
        uv_remap[i] = static_cast<int>(mesh.uvs.size());
        mesh.uvs.push_back(texcoords[i]);
      }
    }
    for (const Face& t : tri_vt) {
      mesh.face_uvs.push_back({uv_remap[t[0]], uv_remap[t[1]], uv_remap[t[2]]});
    }
  }

  rep.vertices = mesh.num_vertices();
  rep.faces = mesh.num_faces();
  if (report) *report = rep;
  return mesh;
}

Mesh load_obj(const std::filesystem::path& path, ObjLoadReport* report) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw_input("cannot open OBJ file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_obj(buffer.str(), path.string(), report);
}

std::string format_obj(const Mesh& mesh) {
  std::string out;
  char buf[160];
  for (const Vec3& p : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", p.x(), p.y(), p.z());
    out += buf;
  }
  for (const Vec2& t : mesh.uvs) {
    std::snprintf(buf, sizeof(buf), "vt %.17g %.17g\n", t.x(), t.y());
    out += buf;
  }
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const Face& t = mesh.faces[f];
    if (mesh.has_uvs()) {
      const Face& u = mesh.face_uvs[f];
      std::snprintf(buf, sizeof(buf), "f %d/%d %d/%d %d/%d\n", t[0] + 1, u[0] + 1, t[1] + 1,
                    u[1] + 1, t[2] + 1, u[2] + 1);
    } else {
      std::snprintf(buf, sizeof(buf), "f %d %d %d\n", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    out += buf;
  }
  return out;
}

void write_obj(const std::filesystem::path& path, const Mesh& mesh) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw_input("cannot write OBJ file '" + path.string() + "'");
  file << format_obj(mesh);
}

}  // namespace uvkit
