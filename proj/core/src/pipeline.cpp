#include "uvkit/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "uvkit/error.hpp"
#include "uvkit/image.hpp"
#include "uvkit/synthetic.hpp"

namespace uvkit {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Runs `fn`, prefixing any library error with the stage and input names.
template <class Fn>
auto staged(const std::string& stage, const std::string& input, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), "stage '" + stage + "' (" + input + "): " + e.what());
  }
}

std::string chart_file_name(int k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "chart_%04d.png", k);
  return buf;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw_input("cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace

RefineMode parse_refine_mode(const std::string& s) {
  if (s == "off") return RefineMode::off;
  if (s == "direct") return RefineMode::direct;
  if (s == "model") return RefineMode::model;
  throw_input("unknown refine mode '" + s + "' (expected off, direct or model)");
}

std::string to_string(RefineMode m) {
  switch (m) {
    case RefineMode::off:
      return "off";
    case RefineMode::direct:
      return "direct";
    case RefineMode::model:
      return "model";
  }
  return "off";
}

void PipelineConfig::validate() const {
  if (input.empty()) throw_input("no input mesh given");
  if (weights.recon < 0 || weights.silhouette < 0 || weights.distortion < 0 || weights.overlap < 0)
    throw_input("loss weights must be non-negative");
  if (raster.resolution < 8) throw_input("raster resolution must be at least 8");
  if (!(raster.sharpness > 0.0)) throw_input("raster sharpness must be positive");
  if (refine == RefineMode::model) {
    if (checkpoint.empty()) throw_input("refine mode 'model' needs a checkpoint");
    if (!fs::exists(checkpoint)) throw_input("checkpoint not found: " + checkpoint.string());
  }
  if (!(margin >= 0.0) || margin >= 1.0) throw_input("pack margin must be in [0, 1)");
  if (threads < 0) throw_input("threads must be non-negative");
  if (arap_iterations < 0) throw_input("arap iterations must be non-negative");
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(std::max(n, 0)));
  auto run = [&](int i) {
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (int i = w; i < n; i += threads) run(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string read_text_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw_input("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw_input("cannot write " + path.string());
  f << text;
}

UnwrapResult run_unwrap(const PipelineConfig& config) {
  config.validate();
  const std::string input_id = config.input.filename().string();
  ensure_dir(config.output_dir);
  UnwrapResult result;
  auto timed = [&](const std::string& stage, auto&& fn) {
    Stopwatch sw;
    auto out = staged(stage, input_id, fn);
    result.timings.push_back({stage, sw.seconds()});
    return out;
  };
  const int threads = resolve_threads(config.threads);

  const Mesh mesh = timed("load", [&] { return load_obj(config.input); });

  auto charts = timed("cut", [&] {
    std::vector<Chart> cs;
    if (config.seams == "none" || config.seams.empty()) {
      cs = charts_without_seams(mesh);
    } else {
      const SeamSet seams = resolve_seam_file(read_seam_file(config.seams), mesh);
      cs = cut_along_seams(mesh, seams);
    }
    std::vector<std::shared_ptr<const Chart>> out;
    for (auto& c : cs) out.push_back(std::make_shared<const Chart>(std::move(c)));
    return out;
  });
  const int n = static_cast<int>(charts.size());
  result.charts.resize(n);

  std::vector<UvChart> uvs(n);
  timed("init", [&] {
    parallel_for(n, threads, [&](int k) {
      const InitResult init = staged("init", input_id + " chart " + std::to_string(k), [&] {
        return initial_uv(charts[k], InitOptions{config.arap_iterations});
      });
      uvs[k] = init.uv;
      ChartSummary& s = result.charts[k];
      s.chart = k;
      s.faces = charts[k]->num_faces();
      s.vertices = charts[k]->num_vertices();
      s.init = init.method == InitMethod::lscm ? "lscm" : "tutte";
      s.flipped_init = count_flipped(*charts[k], init.uv.uv);
      s.distortion_init = distortion_metric(*charts[k], init.uv.uv);
    });
    return 0;
  });

  timed("refine", [&] {
    if (config.refine == RefineMode::off) return 0;
    Checkpoint ck;
    if (config.refine == RefineMode::model) ck = load_checkpoint(config.checkpoint);
    parallel_for(n, threads, [&](int k) {
      staged("refine", input_id + " chart " + std::to_string(k), [&] {
        if (config.refine == RefineMode::direct) {
          DirectRefineResult r = direct_refine(uvs[k], config.direct);
          result.charts[k].warning = r.warning;
          uvs[k] = std::move(r.uv);
        } else {
          const FeaturePack pack = make_feature_pack(*charts[k], uvs[k].uv, ck.params.stats);
          const ForwardResult fw = forward(ck.params, pack);
          std::vector<Vec2> q = uvs[k].uv;
          for (std::size_t i = 0; i < q.size(); ++i) q[i] += fw.offsets.row(static_cast<Eigen::Index>(i)).transpose();
          result.charts[k].pyramid_skipped = fw.pyramid_skipped;
          uvs[k] = normalize_uv(make_uv_chart(charts[k], std::move(q)));
        }
        return 0;
      });
    });
    return 0;
  });

  for (int k = 0; k < n; ++k) {
    result.charts[k].flipped_final = count_flipped(*charts[k], uvs[k].uv);
    result.charts[k].distortion_final = distortion_metric(*charts[k], uvs[k].uv);
  }

  std::vector<UvChart> oriented = timed("orient", [&] {
    std::vector<UvChart> out(n);
    parallel_for(n, threads, [&](int k) { out[k] = normalize_uv(orient_island(uvs[k])); });
    return out;
  });

  result.atlas = timed("pack", [&] { return pack(oriented, config.margin); });
  result.metrics = timed("metrics", [&] { return compute_metrics(mesh, result.atlas); });
  result.output = atlas_to_mesh(mesh, result.atlas);

  timed("write", [&] {
    write_obj(config.output_dir / "unwrapped.obj", result.output);
    write_atlas_preview(config.output_dir / "atlas.png", result.atlas, config.preview_resolution);
    if (config.write_silhouettes) {
      const fs::path dir = config.output_dir / "silhouettes";
      ensure_dir(dir);
      for (int k = 0; k < n; ++k) {
        write_silhouette_png(dir / chart_file_name(k), rasterize_silhouette(oriented[k], config.raster));
      }
    }
    write_text_file(config.output_dir / "metrics.json", format_metrics_json(result.metrics));
    ordered_json charts_doc;
    charts_doc["input"] = input_id;
    charts_doc["seed"] = config.seed;
    charts_doc["refine"] = to_string(config.refine);
    charts_doc["charts"] = json::array();
    for (const auto& s : result.charts) {
      ordered_json c;
      c["chart"] = s.chart;
      c["faces"] = s.faces;
      c["vertices"] = s.vertices;
      c["init"] = s.init;
      c["flipped_init"] = s.flipped_init;
      c["flipped_final"] = s.flipped_final;
      c["distortion_init"] = s.distortion_init;
      c["distortion_final"] = s.distortion_final;
      if (s.pyramid_skipped) c["pyramid_skipped"] = true;
      if (!s.warning.empty()) c["warning"] = s.warning;
      charts_doc["charts"].push_back(std::move(c));
    }
    write_text_file(config.output_dir / "charts.json", charts_doc.dump(2) + "\n");
    return 0;
  });

  ordered_json t;
  for (const auto& s : result.timings) t[s.stage] = s.seconds;
  write_text_file(config.output_dir / "timings.json", t.dump(2) + "\n");
  return result;
}

std::vector<TrainSample> load_dataset(const DatasetConfig& config) {
  if (config.manifest.empty()) {
    return make_synthetic_dataset(config.synthetic_count, config.synthetic_seed, config.grid_min, config.grid_max,
                                  config.warp);
  }
  std::ifstream f(config.manifest);
  if (!f) throw_input("cannot read manifest " + config.manifest.string());
  std::map<std::string, std::vector<IslandRecord>> cache;
  std::vector<TrainSample> out;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw_input("manifest line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.value("selected", false)) continue;
    const std::string mesh_id = j.at("mesh_id").get<std::string>();
    const int island = j.at("island_id").get<int>();
    auto it = cache.find(mesh_id);
    if (it == cache.end()) {
      fs::path p = mesh_id;
      if (p.is_relative()) p = config.manifest.parent_path() / p;
      it = cache.emplace(mesh_id, split_islands(load_obj(p), mesh_id)).first;
    }
    if (island < 0 || island >= static_cast<int>(it->second.size()))
      throw_input("manifest line " + std::to_string(lineno) + ": island id out of range");
    const IslandRecord& r = it->second[island];
    const InitResult init = initial_uv(r.chart);
    out.push_back({r.chart, init.uv.uv, normalize_uv(r.artist_uv).uv, mesh_id + "#" + std::to_string(island)});
  }
  if (out.empty()) throw_input("manifest " + config.manifest.string() + " selects no islands");
  return out;
}

TrainResult run_train(const TrainJob& job) {
  ensure_dir(job.output_dir);
  const auto dataset = staged("dataset", job.dataset.manifest.empty() ? "synthetic" : job.dataset.manifest.string(),
                              [&] { return load_dataset(job.dataset); });
  TrainResult result = staged("train", "dataset", [&] { return train(dataset, job.train); });
  save_checkpoint(job.output_dir / "checkpoint.json", result.params, job.train);
  write_history_csv(job.output_dir / "history.csv", result.history);
  return result;
}

MetricsReport run_metrics(const fs::path& mesh_path, const fs::path& uv_path) {
  const Mesh geometry = staged("load", mesh_path.string(), [&] { return load_obj(mesh_path); });
  const Mesh with_uv = staged("load", uv_path.string(), [&] { return load_obj(uv_path); });
  if (!with_uv.has_uvs()) throw_input(uv_path.string() + " has no texture coordinates");
  if (geometry.num_faces() != with_uv.num_faces()) {
    throw_input("face count mismatch: " + std::to_string(geometry.num_faces()) + " vs " +
                std::to_string(with_uv.num_faces()));
  }
  Mesh combined = geometry;
  combined.uvs = with_uv.uvs;
  combined.face_uvs = with_uv.face_uvs;
  return staged("metrics", uv_path.string(), [&] { return compute_uv_metrics(combined); });
}

UvAtlas run_pack(const Mesh& mesh, double margin, Mesh* output) {
  const auto records = split_islands(mesh);
  std::vector<UvChart> islands;
  islands.reserve(records.size());
  for (const auto& r : records) islands.push_back(normalize_uv(orient_island(r.artist_uv)));
  UvAtlas atlas = pack(islands, margin);
  if (output) *output = atlas_to_mesh(mesh, atlas);
  return atlas;
}

std::vector<IslandRecord> run_curate(const std::vector<fs::path>& inputs, const CurateOptions& opts, int threads) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(in)) {
        if (e.is_regular_file() && e.path().extension() == ".obj") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(in);
    }
  }
  std::vector<std::vector<IslandRecord>> per_file(files.size());
  parallel_for(static_cast<int>(files.size()), resolve_threads(threads), [&](int i) {
    per_file[i] = staged("curate", files[i].string(), [&] {
      auto records = split_islands(load_obj(files[i]), files[i].string());
      for (auto& r : records) r = flag_filters(std::move(r));
      return curate(std::move(records), opts);
    });
  });
  std::vector<IslandRecord> out;
  for (auto& v : per_file) {
    for (auto& r : v) out.push_back(std::move(r));
  }
  return out;
}

void apply_pipeline_json(const std::string& text, PipelineConfig& c) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw_input(std::string("config: ") + e.what());
  }
  try {
    if (j.contains("input")) c.input = j["input"].get<std::string>();
    if (j.contains("seams")) c.seams = j["seams"].get<std::string>();
    if (j.contains("weights")) {
      const json& w = j["weights"];
      c.weights.recon = w.value("recon", c.weights.recon);
      c.weights.silhouette = w.value("silhouette", c.weights.silhouette);
      c.weights.distortion = w.value("distortion", c.weights.distortion);
      c.weights.overlap = w.value("overlap", c.weights.overlap);
    }
    c.raster.resolution = j.value("raster_resolution", c.raster.resolution);
    c.raster.sharpness = j.value("raster_sharpness", c.raster.sharpness);
    if (j.contains("refine")) c.refine = parse_refine_mode(j["refine"].get<std::string>());
    if (j.contains("checkpoint")) c.checkpoint = j["checkpoint"].get<std::string>();
    if (j.contains("direct")) {
      const json& d = j["direct"];
      c.direct.distortion = d.value("distortion", c.direct.distortion);
      c.direct.overlap = d.value("overlap", c.direct.overlap);
      c.direct.boundary = d.value("boundary", c.direct.boundary);
      c.direct.steps = d.value("steps", c.direct.steps);
    }
    c.arap_iterations = j.value("arap_iterations", c.arap_iterations);
    c.margin = j.value("margin", c.margin);
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    c.write_silhouettes = j.value("write_silhouettes", c.write_silhouettes);
    c.preview_resolution = j.value("preview_resolution", c.preview_resolution);
  } catch (const json::exception& e) {
    throw_input(std::string("config: ") + e.what());
  }
}

void apply_train_json(const std::string& text, TrainJob& job) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw_input(std::string("config: ") + e.what());
  }
  try {
    TrainConfig& t = job.train;
    if (j.contains("weights")) {
      const json& w = j["weights"];
      t.weights.recon = w.value("recon", t.weights.recon);
      t.weights.silhouette = w.value("silhouette", t.weights.silhouette);
      t.weights.distortion = w.value("distortion", t.weights.distortion);
      t.weights.overlap = w.value("overlap", t.weights.overlap);
    }
    t.lr = j.value("lr", t.lr);
    t.beta1 = j.value("beta1", t.beta1);
    t.beta2 = j.value("beta2", t.beta2);
    t.eps = j.value("eps", t.eps);
    t.batch_size = j.value("batch_size", t.batch_size);
    t.steps = j.value("steps", t.steps);
    t.seed = j.value("seed", t.seed);
    t.raster.resolution = j.value("raster_resolution", t.raster.resolution);
    t.raster.sharpness = j.value("raster_sharpness", t.raster.sharpness);
    t.width_divisor = j.value("width_divisor", t.width_divisor);
    t.threads = j.value("threads", t.threads);
    DatasetConfig& d = job.dataset;
    if (j.contains("dataset")) {
      const json& ds = j["dataset"];
      d.synthetic_count = ds.value("count", d.synthetic_count);
      d.synthetic_seed = ds.value("seed", d.synthetic_seed);
      d.grid_min = ds.value("grid_min", d.grid_min);
      d.grid_max = ds.value("grid_max", d.grid_max);
      d.warp = ds.value("warp", d.warp);
      if (ds.contains("manifest")) d.manifest = ds["manifest"].get<std::string>();
    }
    if (j.contains("output_dir")) job.output_dir = j["output_dir"].get<std::string>();
  } catch (const json::exception& e) {
    throw_input(std::string("config: ") + e.what());
  }
}

}  // namespace uvkit
