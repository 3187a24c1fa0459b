#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <map>

#include "oracles.hpp"
#include "uvkit/dataprep.hpp"
#include "uvkit/error.hpp"
#include "uvkit/primitives.hpp"

using namespace uvkit;

namespace {

// Appends a planar nx × ny grid at `offset` whose uv is `layout(x, y)`.
void add_grid(Mesh& m, int nx, int ny, const Vec3& offset, const std::function<Vec2(double, double)>& layout) {
  const int base = m.num_vertices();
  const int tbase = static_cast<int>(m.uvs.size());
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double x = static_cast<double>(i) / (nx - 1);
      const double y = static_cast<double>(j) / (ny - 1);
      m.vertices.push_back(offset + Vec3(x, y, 0));
      m.uvs.push_back(layout(x, y));
    }
  }
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      const int a = j * nx + i;
      const Face f1{a, a + 1, a + nx + 1};
      const Face f2{a, a + nx + 1, a + nx};
      m.faces.push_back({base + f1[0], base + f1[1], base + f1[2]});
      m.faces.push_back({base + f2[0], base + f2[1], base + f2[2]});
      m.face_uvs.push_back({tbase + f1[0], tbase + f1[1], tbase + f1[2]});
      m.face_uvs.push_back({tbase + f2[0], tbase + f2[1], tbase + f2[2]});
    }
  }
}

// One uv island per cube side: faces grouped by normal, projected onto the side.
Mesh cube_per_face_layout() {
  Mesh m = primitives::cube();
  std::map<std::pair<int, int>, int> uv_index;  // (side, vertex) -> vt
  for (const Face& f : m.faces) {
    const Vec3 n = (m.vertices[f[1]] - m.vertices[f[0]]).cross(m.vertices[f[2]] - m.vertices[f[0]]);
    int axis = 0;
    n.cwiseAbs().maxCoeff(&axis);
    const int side = 2 * axis + (n[axis] > 0 ? 1 : 0);
    Face ft{};
    for (int k = 0; k < 3; ++k) {
      const auto key = std::make_pair(side, f[k]);
      auto it = uv_index.find(key);
      if (it == uv_index.end()) {
        const Vec3& p = m.vertices[f[k]];
        it = uv_index.emplace(key, static_cast<int>(m.uvs.size())).first;
        m.uvs.emplace_back(p[(axis + 1) % 3] + 3.0 * side, p[(axis + 2) % 3]);
      }
      ft[k] = it->second;
    }
    m.face_uvs.push_back(ft);
  }
  return m;
}

SilhouetteImage random_image(Rng& rng, int res) {
  SilhouetteImage img;
  img.resolution = res;
  img.coverage.resize(static_cast<std::size_t>(res) * res);
  for (double& c : img.coverage) c = rng.uniform();
  return img;
}

SilhouetteImage constant_image(int res, double value) {
  SilhouetteImage img;
  img.resolution = res;
  img.coverage.assign(static_cast<std::size_t>(res) * res, value);
  return img;
}

}  // namespace

TEST(Split, CubePerFaceLayoutGivesSixIslands) {
  const auto records = split_islands(cube_per_face_layout(), "cube");
  ASSERT_EQ(records.size(), 6u);
  for (const auto& r : records) {
    EXPECT_EQ(r.face_ids.size(), 2u);
    EXPECT_EQ(r.vertex_count, 4);
    EXPECT_EQ(r.mesh_id, "cube");
  }
}

TEST(Split, CubeCrossLayoutIsOneIsland) {
  const Mesh cube = primitives::cube();
  auto charts = cut_along_seams(cube, primitives::cube_cross_seams());
  Mesh m = cube;
  for (const Vec3& p : charts[0].positions) m.uvs.emplace_back(p.x(), p.y());
  m.face_uvs.assign(cube.faces.size(), Face{});
  for (int f = 0; f < charts[0].num_faces(); ++f) m.face_uvs[charts[0].source_face[f]] = charts[0].faces[f];
  const auto records = split_islands(m);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].face_ids.size(), 12u);
  EXPECT_EQ(records[0].vertex_count, 14);
}

TEST(Split, RandomSeamsPartitionFaces) {
  Rng rng(1);
  const Mesh h = primitives::hemisphere(12, 6);
  for (int trial = 0; trial < 20; ++trial) {
    SeamSet seams;
    for (const auto& [e, faces] : edge_faces(h.faces)) {
      if (faces.size() == 2 && rng.uniform() < 0.3) seams.insert(e);
    }
    Mesh m = h;
    m.face_uvs.assign(h.faces.size(), Face{});
    // Cut charts may be closed or annular here; only the partition matters.
    std::vector<Chart> charts;
    try {
      charts = cut_along_seams(h, seams);
    } catch (const Error&) {
      continue;
    }
    for (const Chart& c : charts) {
      const int base = static_cast<int>(m.uvs.size());
      for (const Vec3& p : c.positions) m.uvs.emplace_back(p.x(), p.y());
      for (int f = 0; f < c.num_faces(); ++f) {
        m.face_uvs[c.source_face[f]] = {base + c.faces[f][0], base + c.faces[f][1], base + c.faces[f][2]};
      }
    }
    const auto records = split_islands(m);
    std::vector<int> seen(h.faces.size(), 0);
    for (const auto& r : records) {
      for (int f : r.face_ids) ++seen[f];
    }
    for (int s : seen) EXPECT_EQ(s, 1);
    EXPECT_EQ(records.size(), charts.size());
  }
}

TEST(Split, RequiresUvs) { EXPECT_THROW((void)split_islands(primitives::cube()), Error); }

TEST(Filters, FragmentBoundary) {
  Mesh m;
  add_grid(m, 2, 2, Vec3::Zero(), [](double x, double y) { return Vec2(x, y); });  // 4 vertices
  m.vertices.push_back(Vec3(5, 0, 0));
  m.vertices.push_back(Vec3(6, 0, 0));
  m.vertices.push_back(Vec3(5, 1, 0));
  m.uvs.push_back(Vec2(2, 0));
  m.uvs.push_back(Vec2(3, 0));
  m.uvs.push_back(Vec2(2, 1));
  m.faces.push_back({4, 5, 6});
  m.face_uvs.push_back({4, 5, 6});
  add_grid(m, 5, 2, Vec3(10, 0, 0), [](double x, double y) { return Vec2(4 + x, y); });  // 10 vertices
  auto records = split_islands(m);
  ASSERT_EQ(records.size(), 3u);
  for (auto& r : records) r = flag_filters(r);
  EXPECT_TRUE(records[0].fragment);   // 4 < 5
  EXPECT_TRUE(records[1].fragment);   // 3 vertices
  EXPECT_FALSE(records[2].fragment);

  Mesh five;
  five.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0), Vec3(0.5, 0.5, 0)};
  five.faces = {{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}};
  for (const Vec3& p : five.vertices) five.uvs.emplace_back(p.x(), p.y());
  five.face_uvs = five.faces;
  const IslandRecord r5 = flag_filters(split_islands(five).at(0));
  EXPECT_EQ(r5.vertex_count, 5);
  EXPECT_FALSE(r5.fragment);
  EXPECT_FALSE(r5.overlapping);
}

TEST(Filters, CoincidentFacesOverlapAndIdempotent) {
  Mesh m;
  m.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0), Vec3(2, 0, 0), Vec3(2, 1, 0)};
  m.faces = {{0, 1, 2}, {1, 3, 2}, {1, 4, 3}, {4, 5, 3}};
  // Faces 2 and 3 reuse the uv triangle positions of faces 0 and 1.
  m.uvs = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1), Vec2(1, 1), Vec2(0, 0), Vec2(0, 1)};
  m.face_uvs = {{0, 1, 2}, {1, 3, 2}, {1, 4, 3}, {4, 5, 3}};
  const IslandRecord once = flag_filters(split_islands(m).at(0));
  EXPECT_TRUE(once.overlapping);
  const IslandRecord twice = flag_filters(once);
  EXPECT_EQ(twice.overlapping, once.overlapping);
  EXPECT_EQ(twice.fragment, once.fragment);
}

TEST(Ssim, IdenticalIsOne) {
  Rng rng(2);
  const SilhouetteImage a = random_image(rng, 32);
  EXPECT_NEAR(ssim_score(a, a), 1.0, 1e-9);
}

TEST(Ssim, ConstantImagesClosedForm) {
  const double c1 = 1e-4;
  const double s = ssim_score(constant_image(32, 0.0), constant_image(32, 1.0));
  EXPECT_LT(s, 0.01);
  EXPECT_NEAR(s, c1 / (1.0 + c1), 1e-12);
}

TEST(Ssim, SymmetricAndBounded) {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const SilhouetteImage a = random_image(rng, 20);
    const SilhouetteImage b = random_image(rng, 20);
    const double ab = ssim_score(a, b);
    EXPECT_EQ(ab, ssim_score(b, a));
    EXPECT_GE(ab, -1.0);
    EXPECT_LE(ab, 1.0);
  }
}

TEST(Ssim, Preconditions) {
  EXPECT_THROW((void)ssim_score(constant_image(16, 0), constant_image(32, 0)), Error);
  EXPECT_THROW((void)ssim_score(constant_image(8, 0), constant_image(8, 0)), Error);
}

TEST(Curate, BandFixtures) {
  Mesh m;
  // 0: artist layout equals the conformal unwrap (planar square) -> above band.
  add_grid(m, 6, 6, Vec3(0, 0, 0), [](double x, double y) { return Vec2(x, y); });
  // 1: thin strip against a square unwrap -> below band.
  add_grid(m, 6, 6, Vec3(2, 0, 0), [](double x, double y) { return Vec2(x, 0.08 * y); });
  // 2: trapezoid, moderately different -> in band.
  add_grid(m, 6, 6, Vec3(4, 0, 0), [](double x, double y) { return Vec2((x - 0.5) * (1.0 - 0.7 * y) + 0.5, y); });
  // 3: fragment.
  add_grid(m, 2, 2, Vec3(6, 0, 0), [](double x, double y) { return Vec2(x, y); });
  auto records = split_islands(m, "fixture");
  ASSERT_EQ(records.size(), 4u);
  for (auto& r : records) r = flag_filters(r);
  const auto out = curate(records);
  ASSERT_EQ(out.size(), 4u);
  ASSERT_TRUE(out[0].ssim.has_value());
  EXPECT_GT(*out[0].ssim, 0.8);
  EXPECT_LT(*out[1].ssim, 0.5);
  EXPECT_GE(*out[2].ssim, 0.5);
  EXPECT_LE(*out[2].ssim, 0.8);
  EXPECT_FALSE(out[3].ssim.has_value());
  std::vector<bool> selected;
  for (const auto& r : out) selected.push_back(r.selected);
  EXPECT_EQ(selected, (std::vector<bool>{false, false, true, false}));
  EXPECT_EQ(out[3].reason, "fragment");
  const std::string manifest = format_manifest_jsonl(out);
  EXPECT_EQ(std::count(manifest.begin(), manifest.end(), '\n'), 4);
}

TEST(Curate, BandLogic) {
  IslandRecord r;
  EXPECT_TRUE(in_selection_band(r, 0.5));
  EXPECT_TRUE(in_selection_band(r, 0.8));
  EXPECT_FALSE(in_selection_band(r, 0.49));
  EXPECT_FALSE(in_selection_band(r, 0.81));
  r.overlapping = true;
  EXPECT_FALSE(in_selection_band(r, 0.6));
  r.overlapping = false;
  r.fragment = true;
  EXPECT_FALSE(in_selection_band(r, 0.6));
}
