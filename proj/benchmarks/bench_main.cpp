#include <benchmark/benchmark.h>

#include <memory>

#include "uvkit/atlas.hpp"
#include "uvkit/losses.hpp"
#include "uvkit/model.hpp"
#include "uvkit/param.hpp"
#include "uvkit/primitives.hpp"
#include "uvkit/synthetic.hpp"

using namespace uvkit;

namespace {

std::shared_ptr<const Chart> hemisphere_chart(int slices) {
  const Mesh h = primitives::hemisphere(slices, slices / 2);
  return std::make_shared<const Chart>(make_chart(h.vertices, h.faces));
}

void BM_Lscm(benchmark::State& state) {
  const auto chart = hemisphere_chart(static_cast<int>(state.range(0)));
  const auto [a, b] = default_pins(*chart);
  for (auto _ : state) benchmark::DoNotOptimize(lscm(chart, a, b));
  state.counters["faces"] = chart->num_faces();
}
BENCHMARK(BM_Lscm)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Tutte(benchmark::State& state) {
  const auto chart = hemisphere_chart(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(tutte_embed(chart));
}
BENCHMARK(BM_Tutte)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Rasterize(benchmark::State& state) {
  const SyntheticPair p = make_synthetic_pair(1, 12, 0.3);
  const RasterConfig cfg{static_cast<int>(state.range(0)), 30.0};
  for (auto _ : state) benchmark::DoNotOptimize(rasterize_silhouette(*p.chart, p.q_init, cfg, true));
}
BENCHMARK(BM_Rasterize)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_TotalLoss(benchmark::State& state) {
  const SyntheticPair p = make_synthetic_pair(2, 12, 0.3);
  LossOptions opts;
  opts.raster = {64, 30.0};
  for (auto _ : state) benchmark::DoNotOptimize(total_loss(*p.chart, p.q_init, p.q_gt, opts));
}
BENCHMARK(BM_TotalLoss)->Unit(benchmark::kMillisecond);

void BM_OverlapFaces(benchmark::State& state) {
  const auto chart = hemisphere_chart(static_cast<int>(state.range(0)));
  const UvChart uv = lscm(chart, default_pins(*chart).first, default_pins(*chart).second);
  std::vector<Tri2> tris;
  for (const Face& f : chart->faces) tris.push_back({uv.uv[f[0]], uv.uv[f[1]], uv.uv[f[2]]});
  for (auto _ : state) benchmark::DoNotOptimize(overlap_faces(tris));
  state.counters["faces"] = static_cast<double>(tris.size());
}
BENCHMARK(BM_OverlapFaces)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& state) {
  const SyntheticPair p = make_synthetic_pair(3, 10, 0.3);
  const RefinerParams params = init_params(ModelConfig::scaled(static_cast<int>(state.range(0))), 1);
  const FeaturePack pack = make_feature_pack(*p.chart, p.q_init, params.stats);
  const ad::Matrix g = ad::Matrix::Ones(p.chart->num_vertices(), 2);
  for (auto _ : state) benchmark::DoNotOptimize(backward(params, pack, g));
}
BENCHMARK(BM_ForwardBackward)->Arg(8)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Pack(benchmark::State& state) {
  std::vector<UvChart> islands;
  for (int k = 0; k < state.range(0); ++k) {
    const SyntheticPair p = make_synthetic_pair(10 + k, 6, 0.2);
    islands.push_back(normalize_uv(orient_island(make_uv_chart(p.chart, p.q_init))));
  }
  for (auto _ : state) benchmark::DoNotOptimize(pack(islands));
}
BENCHMARK(BM_Pack)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
