// uvkit command-line front end.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uvkit/error.hpp"
#include "uvkit/image.hpp"
#include "uvkit/pipeline.hpp"
#include "uvkit/seams.hpp"

namespace fs = std::filesystem;
using namespace uvkit;

namespace {

template <class T>
void override_if(const CLI::Option* opt, T& dst, const T& value) {
  if (opt->count() > 0) dst = value;
}

void print_report(const MetricsReport& m) {
  std::printf("distortion      %.6g\n", m.distortion);
  std::printf("utilization     %.4f (margin excluded %.4f)\n", m.utilization, m.utilization_margin_excluded);
  std::printf("overlap         %.4f%% (%d flipped, %d overlapping of %d faces)\n", 100.0 * m.overlap_pct,
              m.flipped_faces, m.overlapping_faces, m.faces);
  std::printf("fragments       %d\n", m.fragments);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uvkit: seam-driven UV unwrapping, refinement and atlas packing"};
  app.set_version_flag("--version", std::string("uvkit ") + UVKIT_VERSION);
  app.require_subcommand(1);
  std::string config_path;
  int threads = 0;
  app.add_option("--config", config_path, "JSON config file; flags override its values")->check(CLI::ExistingFile);
  auto* threads_opt = app.add_option("--threads", threads, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

  // unwrap -----------------------------------------------------------------
  PipelineConfig pc;
  std::string input, seams = "none", refine = "off", checkpoint, out_dir = "out";
  double margin = kDefaultPackMargin, boundary_weight = 0.1, sharpness = 30.0;
  int arap = 0, refine_steps = 500, raster_res = 256;
  std::uint64_t seed = 0;
  bool no_silhouettes = false;
  auto* unwrap = app.add_subcommand("unwrap", "cut, parameterize, refine and pack a mesh");
  auto* u_input = unwrap->add_option("input", input, "input OBJ")->check(CLI::ExistingFile);
  auto* u_seams = unwrap->add_option("--seams", seams, "seam JSON file, or 'none'");
  auto* u_refine = unwrap->add_option("--refine", refine, "off | direct | model")
                       ->check(CLI::IsMember({"off", "direct", "model"}));
  auto* u_ck = unwrap->add_option("--checkpoint", checkpoint, "refiner checkpoint for --refine model");
  auto* u_margin = unwrap->add_option("--margin", margin, "pack margin in normalized units");
  auto* u_arap = unwrap->add_option("--arap", arap, "ARAP iterations after the conformal map");
  auto* u_steps = unwrap->add_option("--refine-steps", refine_steps, "direct refinement steps");
  auto* u_bw = unwrap->add_option("--boundary-weight", boundary_weight, "direct refinement boundary weight");
  auto* u_res = unwrap->add_option("--raster-resolution", raster_res, "silhouette resolution");
  auto* u_sharp = unwrap->add_option("--raster-sharpness", sharpness, "silhouette edge sharpness");
  auto* u_out = unwrap->add_option("-o,--output", out_dir, "output directory");
  auto* u_seed = unwrap->add_option("--seed", seed, "seed recorded in the report");
  unwrap->add_flag("--no-silhouettes", no_silhouettes, "skip per-chart silhouette PNGs");

  // train ------------------------------------------------------------------
  TrainJob job;
  int steps = 0, batch = 0, divisor = 0, count = 0, grid_min = 0, grid_max = 0;
  double lr = 0.0, warp = 0.0;
  std::string manifest, train_out = "out";
  std::uint64_t train_seed = 0, data_seed = 0;
  auto* train_cmd = app.add_subcommand("train", "train the offset refiner");
  auto* t_steps = train_cmd->add_option("--steps", steps, "optimizer steps");
  auto* t_batch = train_cmd->add_option("--batch-size", batch, "samples per step");
  auto* t_lr = train_cmd->add_option("--lr", lr, "Adam learning rate");
  auto* t_seed = train_cmd->add_option("--seed", train_seed, "training seed");
  auto* t_div = train_cmd->add_option("--width-divisor", divisor, "divide reference layer widths by this");
  auto* t_count = train_cmd->add_option("--count", count, "synthetic pairs");
  auto* t_dseed = train_cmd->add_option("--data-seed", data_seed, "synthetic data seed");
  auto* t_gmin = train_cmd->add_option("--grid-min", grid_min, "smallest synthetic grid");
  auto* t_gmax = train_cmd->add_option("--grid-max", grid_max, "largest synthetic grid");
  auto* t_warp = train_cmd->add_option("--warp", warp, "synthetic bump amplitude");
  auto* t_manifest = train_cmd->add_option("--manifest", manifest, "curated manifest (JSONL)");
  auto* t_out = train_cmd->add_option("-o,--output", train_out, "output directory");

  // metrics ----------------------------------------------------------------
  std::string metrics_mesh, metrics_uv, metrics_out;
  auto* metrics = app.add_subcommand("metrics", "score an existing unwrap");
  metrics->add_option("mesh", metrics_mesh, "reference geometry OBJ")->required()->check(CLI::ExistingFile);
  metrics->add_option("unwrapped", metrics_uv, "OBJ carrying the uvs")->required()->check(CLI::ExistingFile);
  metrics->add_option("-o,--output", metrics_out, "write the JSON report here");

  // pack -------------------------------------------------------------------
  std::string pack_in, pack_out, pack_preview;
  double pack_margin = kDefaultPackMargin;
  auto* pack_cmd = app.add_subcommand("pack", "re-pack the uv islands of an OBJ");
  pack_cmd->add_option("input", pack_in, "OBJ with uvs")->required()->check(CLI::ExistingFile);
  pack_cmd->add_option("-o,--output", pack_out, "output OBJ")->required();
  pack_cmd->add_option("--margin", pack_margin, "margin in normalized units");
  pack_cmd->add_option("--preview", pack_preview, "atlas preview PNG");

  // seams ------------------------------------------------------------------
  std::string seam_mesh, seam_in, seam_out;
  int bits = 10;
  auto* enc = app.add_subcommand("seams-encode", "seam JSON to quantized tokens");
  enc->add_option("mesh", seam_mesh, "mesh OBJ")->required()->check(CLI::ExistingFile);
  enc->add_option("seams", seam_in, "seam JSON")->required()->check(CLI::ExistingFile);
  enc->add_option("-o,--output", seam_out, "token JSON")->required();
  enc->add_option("--bits", bits, "bits per coordinate")->check(CLI::Range(4, 16));
  auto* dec = app.add_subcommand("seams-decode", "quantized tokens to seam JSON");
  dec->add_option("mesh", seam_mesh, "mesh OBJ")->required()->check(CLI::ExistingFile);
  dec->add_option("tokens", seam_in, "token JSON")->required()->check(CLI::ExistingFile);
  dec->add_option("-o,--output", seam_out, "seam JSON")->required();

  // curate -----------------------------------------------------------------
  std::vector<std::string> curate_in;
  std::string curate_out;
  CurateOptions copts;
  auto* curate_cmd = app.add_subcommand("curate", "split, filter and SSIM-score uv islands");
  curate_cmd->add_option("inputs", curate_in, "OBJ files or directories")->required();
  curate_cmd->add_option("-o,--output", curate_out, "manifest (JSONL)")->required();
  curate_cmd->add_option("--resolution", copts.raster.resolution, "silhouette resolution");
  curate_cmd->add_option("--sharpness", copts.raster.sharpness, "silhouette edge sharpness");
  curate_cmd->add_option("--ssim-low", copts.ssim_low, "lower SSIM bound");
  curate_cmd->add_option("--ssim-high", copts.ssim_high, "upper SSIM bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code(ErrorKind::input);
  }

  try {
    if (unwrap->parsed()) {
      if (!config_path.empty()) apply_pipeline_json(read_text_file(config_path), pc);
      if (u_input->count()) pc.input = input;
      override_if(u_seams, pc.seams, seams);
      if (u_refine->count()) pc.refine = parse_refine_mode(refine);
      if (u_ck->count()) pc.checkpoint = checkpoint;
      override_if(u_margin, pc.margin, margin);
      override_if(u_arap, pc.arap_iterations, arap);
      override_if(u_steps, pc.direct.steps, refine_steps);
      override_if(u_bw, pc.direct.boundary, boundary_weight);
      override_if(u_res, pc.raster.resolution, raster_res);
      override_if(u_sharp, pc.raster.sharpness, sharpness);
      if (u_out->count()) pc.output_dir = out_dir;
      override_if(u_seed, pc.seed, seed);
      override_if(threads_opt, pc.threads, threads);
      if (no_silhouettes) pc.write_silhouettes = false;
      const UnwrapResult r = run_unwrap(pc);
      std::printf("%zu chart(s) -> %s\n", r.charts.size(), pc.output_dir.string().c_str());
      for (const auto& c : r.charts) {
        if (!c.warning.empty()) std::fprintf(stderr, "warning: chart %d: %s\n", c.chart, c.warning.c_str());
      }
      print_report(r.metrics);
    } else if (train_cmd->parsed()) {
      if (!config_path.empty()) apply_train_json(read_text_file(config_path), job);
      override_if(t_steps, job.train.steps, steps);
      override_if(t_batch, job.train.batch_size, batch);
      override_if(t_lr, job.train.lr, lr);
      override_if(t_seed, job.train.seed, train_seed);
      override_if(t_div, job.train.width_divisor, divisor);
      override_if(t_count, job.dataset.synthetic_count, count);
      override_if(t_dseed, job.dataset.synthetic_seed, data_seed);
      override_if(t_gmin, job.dataset.grid_min, grid_min);
      override_if(t_gmax, job.dataset.grid_max, grid_max);
      override_if(t_warp, job.dataset.warp, warp);
      if (t_manifest->count()) job.dataset.manifest = manifest;
      if (t_out->count()) job.output_dir = train_out;
      override_if(threads_opt, job.train.threads, threads);
      if (job.train.threads == 0) job.train.threads = 1;
      const TrainResult r = run_train(job);
      const HistoryRow& last = r.history.back();
      std::printf("step %d: recon %.6g silhouette %.6g distortion %.6g overlap_soft %.6g overlap_count %d total %.6g\n",
                  last.step, last.recon, last.silhouette, last.distortion, last.overlap_soft, last.overlap_count,
                  last.total);
      std::printf("checkpoint -> %s\n", (job.output_dir / "checkpoint.json").string().c_str());
    } else if (metrics->parsed()) {
      const MetricsReport r = run_metrics(metrics_mesh, metrics_uv);
      if (!metrics_out.empty()) write_text_file(metrics_out, format_metrics_json(r));
      print_report(r);
    } else if (pack_cmd->parsed()) {
      Mesh packed;
      const UvAtlas atlas = run_pack(load_obj(pack_in), pack_margin, &packed);
      write_obj(pack_out, packed);
      if (!pack_preview.empty()) write_atlas_preview(pack_preview, atlas);
      print_report(compute_metrics(packed, atlas));
    } else if (enc->parsed()) {
      const Mesh mesh = load_obj(seam_mesh);
      const SeamSet s = resolve_seam_file(read_seam_file(seam_in), mesh);
      const TokenSeq t = encode_seams(s, mesh, bits);
      write_token_file(seam_out, t);
      std::printf("%zu segment(s), %zu token(s)\n", s.size(), t.tokens.size());
    } else if (dec->parsed()) {
      const Mesh mesh = load_obj(seam_mesh);
      const SeamSet s = decode_seams(read_token_file(seam_in), mesh);
      write_seam_file(seam_out, s);
      std::printf("%zu segment(s)\n", s.size());
    } else if (curate_cmd->parsed()) {
      std::vector<fs::path> paths(curate_in.begin(), curate_in.end());
      const auto records = run_curate(paths, copts, threads);
      write_text_file(curate_out, format_manifest_jsonl(records));
      int selected = 0;
      for (const auto& r : records) selected += r.selected ? 1 : 0;
      std::printf("%zu island(s), %d selected\n", records.size(), selected);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return exit_code(ErrorKind::invariant);
  }
  return 0;
}
