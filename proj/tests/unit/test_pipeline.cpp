#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <stdexcept>

#include "uvkit/error.hpp"
#include "uvkit/pipeline.hpp"
#include "uvkit/primitives.hpp"

using namespace uvkit;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir(const std::string& name) {
  const fs::path p = fs::path(UVKIT_TEST_TMP) / "pipeline" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

PipelineConfig unwrap_config(const fs::path& dir, const Mesh& mesh, const SeamSet& seams) {
  write_obj(dir / "in.obj", mesh);
  PipelineConfig c;
  c.input = dir / "in.obj";
  if (!seams.empty()) {
    write_seam_file(dir / "seams.json", seams);
    c.seams = (dir / "seams.json").string();
  }
  c.output_dir = dir / "out";
  c.threads = 1;
  c.preview_resolution = 64;
  c.raster = {32, 30.0};
  return c;
}

}  // namespace

TEST(Unwrap, CubeCrossIsIsometric) {
  const fs::path dir = tmp_dir("cube");
  const UnwrapResult r =
      run_unwrap(unwrap_config(dir, primitives::cube(), primitives::cube_cross_seams()));
  EXPECT_LE(r.metrics.distortion, 1e-6);
  EXPECT_EQ(r.metrics.fragments, 1);
  EXPECT_EQ(r.metrics.overlap_pct, 0.0);
  EXPECT_EQ(r.metrics.faces, 12);
  for (const char* f : {"unwrapped.obj", "atlas.png", "metrics.json", "charts.json", "timings.json",
                        "silhouettes/chart_0000.png"}) {
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  }
  EXPECT_TRUE(load_obj(dir / "out" / "unwrapped.obj").has_uvs());
}

TEST(Unwrap, CylinderNearIsometric) {
  const fs::path dir = tmp_dir("cylinder");
  const UnwrapResult r =
      run_unwrap(unwrap_config(dir, primitives::open_cylinder(16, 8), primitives::cylinder_generatrix_seams(16, 8)));
  EXPECT_LE(r.metrics.distortion, 1e-3);
  EXPECT_EQ(r.metrics.overlap_pct, 0.0);
}

TEST(Unwrap, ClosedMeshFailsAtCut) {
  const fs::path dir = tmp_dir("sphere");
  try {
    (void)run_unwrap(unwrap_config(dir, primitives::icosahedron(), {}));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::input);
    EXPECT_NE(std::string(e.what()).find("stage 'cut'"), std::string::npos) << e.what();
  }
}

TEST(Unwrap, RepeatRunsAreByteIdentical) {
  const fs::path a = tmp_dir("repeat_a");
  const fs::path b = tmp_dir("repeat_b");
  const Mesh h = primitives::hemisphere(12, 6);
  PipelineConfig ca = unwrap_config(a, h, {});
  PipelineConfig cb = unwrap_config(b, h, {});
  ca.refine = cb.refine = RefineMode::direct;
  ca.direct.steps = cb.direct.steps = 30;
  (void)run_unwrap(ca);
  (void)run_unwrap(cb);
  for (const char* f : {"metrics.json", "charts.json", "unwrapped.obj"}) {
    EXPECT_EQ(read_text_file(a / "out" / f), read_text_file(b / "out" / f)) << f;
  }
}

TEST(Train, WritesHistoryAndImproves) {
  const fs::path dir = tmp_dir("train");
  TrainJob job;
  job.dataset.synthetic_count = 16;
  job.dataset.synthetic_seed = 7;
  job.train.steps = 200;
  job.train.seed = 7;
  job.train.lr = 1e-3;
  job.train.width_divisor = 8;
  job.train.raster = {32, 30.0};
  job.output_dir = dir / "nested" / "out";
  const TrainResult r = run_train(job);
  ASSERT_EQ(r.history.size(), 200u);
  EXPECT_LT(r.history.back().total, r.history.front().total);
  const std::string csv = read_text_file(job.output_dir / "history.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 201);
  EXPECT_TRUE(fs::exists(job.output_dir / "checkpoint.json"));
}

TEST(Train, SingleStep) {
  const fs::path dir = tmp_dir("train_one");
  TrainJob job;
  job.dataset.synthetic_count = 2;
  job.train.steps = 1;
  job.train.width_divisor = 8;
  job.train.raster = {32, 30.0};
  job.output_dir = dir;
  EXPECT_EQ(run_train(job).history.size(), 1u);
}

TEST(Metrics, IsometricUvs) {
  const fs::path dir = tmp_dir("metrics_iso");
  const Mesh g = primitives::grid(4, 4);
  Mesh with = g;
  for (const Vec3& p : g.vertices) with.uvs.emplace_back(p.x(), p.y());
  with.face_uvs = g.faces;
  write_obj(dir / "geo.obj", g);
  write_obj(dir / "uv.obj", with);
  const MetricsReport m = run_metrics(dir / "geo.obj", dir / "uv.obj");
  EXPECT_LE(m.distortion, 1e-6);
  EXPECT_EQ(m.overlap_pct, 0.0);
  EXPECT_THROW((void)run_metrics(dir / "geo.obj", dir / "geo.obj"), Error);
}

TEST(Metrics, OneFlippedFaceOfTwelve) {
  const fs::path dir = tmp_dir("metrics_flip");
  // Twelve disjoint triangles, each its own island; one mirrored in uv.
  Mesh m;
  for (int k = 0; k < 12; ++k) {
    const int b = m.num_vertices();
    const double x = 2.0 * k;
    m.vertices.push_back(Vec3(x, 0, 0));
    m.vertices.push_back(Vec3(x + 1, 0, 0));
    m.vertices.push_back(Vec3(x, 1, 0));
    m.uvs.emplace_back(x, 0);
    m.uvs.emplace_back(k == 5 ? x - 1 : x + 1, 0);
    m.uvs.emplace_back(x, 1);
    m.faces.push_back({b, b + 1, b + 2});
    m.face_uvs.push_back({b, b + 1, b + 2});
  }
  write_obj(dir / "uv.obj", m);
  const MetricsReport r = run_metrics(dir / "uv.obj", dir / "uv.obj");
  EXPECT_EQ(r.flipped_faces, 1);
  EXPECT_DOUBLE_EQ(r.overlap_pct, 1.0 / 12.0);
}

TEST(Config, JsonOverridesOnlyPresentFields) {
  PipelineConfig c;
  c.margin = 0.02;
  apply_pipeline_json(R"({"refine": "direct", "weights": {"overlap": 2.5}, "direct": {"steps": 7}})", c);
  EXPECT_EQ(c.refine, RefineMode::direct);
  EXPECT_EQ(c.weights.overlap, 2.5);
  EXPECT_EQ(c.weights.recon, LossWeights{}.recon);
  EXPECT_EQ(c.direct.steps, 7);
  EXPECT_EQ(c.margin, 0.02);
  EXPECT_THROW(apply_pipeline_json("{", c), Error);
  EXPECT_THROW(apply_pipeline_json(R"({"refine": "sometimes"})", c), Error);

  TrainJob job;
  apply_train_json(R"({"lr": 0.01, "steps": 3})", job);
  EXPECT_EQ(job.train.lr, 0.01);
  EXPECT_EQ(job.train.steps, 3);
  EXPECT_EQ(job.train.batch_size, TrainConfig{}.batch_size);
}

TEST(ParallelFor, RethrowsLowestIndexFailure) {
  for (int threads : {1, 3}) {
    std::atomic<int> ran{0};
    try {
      parallel_for(10, threads, [&](int i) {
        ++ran;
        if (i == 3 || i == 7) throw std::runtime_error("fail " + std::to_string(i));
      });
      FAIL();
    } catch (const std::runtime_error& e) {
      EXPECT_STREQ(e.what(), "fail 3");
    }
    EXPECT_EQ(ran.load(), 10);
  }
}

TEST(ParallelFor, CoversEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(50);
  parallel_for(50, 4, [&](int i) { ++hits[i]; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}
