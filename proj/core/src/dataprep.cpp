#include "uvkit/dataprep.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "union_find.hpp"
#include "uvkit/atlas.hpp"
#include "uvkit/error.hpp"

namespace uvkit {

std::vector<std::vector<int>> uv_islands(const Mesh& mesh) {
  if (!mesh.has_uvs()) throw_input("mesh has no texture coordinates");
  const auto incident = edge_faces(mesh.face_uvs);
  detail::UnionFind uf(mesh.num_faces());
  for (const auto& [edge, fs] : incident) {
    for (std::size_t k = 1; k < fs.size(); ++k) uf.unite(fs[0], fs[k]);
  }
  std::map<int, std::vector<int>> groups;
  for (int f = 0; f < mesh.num_faces(); ++f) groups[uf.find(f)].push_back(f);
  std::vector<std::vector<int>> out;
  out.reserve(groups.size());
  for (auto& [root, fs] : groups) out.push_back(std::move(fs));
  return out;
}

std::vector<IslandRecord> split_islands(const Mesh& mesh, const std::string& mesh_id) {
  const auto groups = uv_islands(mesh);
  std::vector<IslandRecord> out;
  out.reserve(groups.size());
  for (std::size_t k = 0; k < groups.size(); ++k) {
    std::map<std::pair<int, int>, int> local;
    std::vector<Vec3> positions;
    std::vector<Vec2> uv;
    std::vector<int> source_vertex;
    std::vector<Face> faces;
    for (int f : groups[k]) {
      Face t{};
      for (int c = 0; c < 3; ++c) {
        const std::pair<int, int> key{mesh.faces[f][c], mesh.face_uvs[f][c]};
        auto [it, inserted] = local.try_emplace(key, static_cast<int>(positions.size()));
        if (inserted) {
          positions.push_back(mesh.vertices[key.first]);
          uv.push_back(mesh.uvs[key.second]);
          source_vertex.push_back(key.first);
        }
        t[c] = it->second;
      }
      faces.push_back(t);
    }
    IslandRecord r;
    r.island_id = static_cast<int>(k);
    r.mesh_id = mesh_id;
    r.face_ids = groups[k];
    r.chart = std::make_shared<const Chart>(make_chart(std::move(positions), std::move(faces),
                                                       std::move(source_vertex), groups[k]));
    r.artist_uv = make_uv_chart(r.chart, std::move(uv));
    r.vertex_count = r.chart->num_vertices();
    out.push_back(std::move(r));
  }
  return out;
}

IslandRecord flag_filters(IslandRecord record) {
  record.fragment = record.vertex_count < kFragmentVertexLimit;
  std::vector<Tri2> tris;
  const auto& uv = record.artist_uv.uv;
  for (const Face& t : record.chart->faces) tris.push_back({uv[t[0]], uv[t[1]], uv[t[2]]});
  const auto hit = overlapping_triangles(tris);
  record.overlapping = std::any_of(hit.begin(), hit.end(), [](bool b) { return b; });
  return record;
}

double ssim_score(const SilhouetteImage& a, const SilhouetteImage& b) {
  if (a.resolution != b.resolution) throw_input("ssim: resolution mismatch");
  if (a.resolution < 16) throw_input("ssim: resolution must be at least 16");
  constexpr int kWin = 11;
  constexpr double kSigma = 1.5;
  constexpr double C1 = 0.01 * 0.01;
  constexpr double C2 = 0.03 * 0.03;
  double w[kWin];
  double wsum = 0.0;
  for (int i = 0; i < kWin; ++i) {
    const double d = i - kWin / 2;
    w[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    wsum += w[i];
  }
  for (double& x : w) x /= wsum;

  const int res = a.resolution;
  const int out = res - kWin + 1;
  double total = 0.0;
  for (int y = 0; y < out; ++y) {
    for (int x = 0; x < out; ++x) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int j = 0; j < kWin; ++j) {
        for (int i = 0; i < kWin; ++i) {
          const double wt = w[j] * w[i];
          const double va = a.at(x + i, y + j);
          const double vb = b.at(x + i, y + j);
          ma += wt * va;
          mb += wt * vb;
          saa += wt * va * va;
          sbb += wt * vb * vb;
          sab += wt * (va * vb);
        }
      }
      const double var_a = saa - ma * ma;
      const double var_b = sbb - mb * mb;
      const double cov = sab - ma * mb;
      total += ((2.0 * (ma * mb) + C1) * (2.0 * cov + C2)) / ((ma * ma + mb * mb + C1) * (var_a + var_b + C2));
    }
  }
  return total / (static_cast<double>(out) * out);
}

bool in_selection_band(const IslandRecord& r, double ssim, const CurateOptions& opts) {
  return !r.overlapping && !r.fragment && ssim >= opts.ssim_low && ssim <= opts.ssim_high;
}

std::vector<IslandRecord> curate(std::vector<IslandRecord> records, const CurateOptions& opts) {
  for (IslandRecord& r : records) {
    r.selected = false;
    r.ssim.reset();
    r.reason.clear();
    if (r.fragment) {
      r.reason = "fragment";
      continue;
    }
    if (r.overlapping) {
      r.reason = "overlapping";
      continue;
    }
    if (!r.chart->is_disk()) {
      r.reason = "not a disk";
      continue;
    }
    try {
      const auto pins = default_pins(*r.chart);
      const UvChart unwrap = normalize_uv(orient_island(lscm(r.chart, pins.first, pins.second)));
      const UvChart artist = normalize_uv(orient_island(r.artist_uv));
      const double s = ssim_score(rasterize_silhouette(artist, opts.raster), rasterize_silhouette(unwrap, opts.raster));
      r.ssim = s;
      r.selected = in_selection_band(r, s, opts);
      if (!r.selected) r.reason = s > opts.ssim_high ? "ssim above band" : "ssim below band";
    } catch (const Error& e) {
      r.reason = std::string("re-unwrap failed: ") + e.what();
    }
  }
  return records;
}

std::string format_manifest_jsonl(std::span<const IslandRecord> records) {
  std::string out;
  for (const IslandRecord& r : records) {
    nlohmann::json j;
    j["mesh_id"] = r.mesh_id;
    j["island_id"] = r.island_id;
    j["faces"] = r.face_ids.size();
    j["vertices"] = r.vertex_count;
    j["face_ids"] = r.face_ids;
    j["fragment"] = r.fragment;
    j["overlapping"] = r.overlapping;
    j["selected"] = r.selected;
    j["ssim"] = r.ssim ? nlohmann::json(*r.ssim) : nlohmann::json(nullptr);
    if (!r.reason.empty()) j["reason"] = r.reason;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace uvkit
