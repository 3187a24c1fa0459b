#include "uvkit/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "uvkit/error.hpp"
#include "uvkit/random.hpp"

namespace uvkit {

using ad::Matrix;

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw_input("train: lr must be finite and non-negative");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw_input("train: betas must be in [0,1)");
  if (!(eps > 0.0)) throw_input("train: eps must be positive");
  if (batch_size < 1) throw_input("train: batch size must be at least 1");
  if (steps < 1) throw_input("train: step count must be at least 1");
  if (raster.resolution < 8) throw_input("train: raster resolution must be at least 8");
  if (width_divisor < 1) throw_input("train: width divisor must be positive");
  if (threads < 1) throw_input("train: threads must be at least 1");
}

PreparedSample prepare_sample(const TrainSample& sample, const FeatureStats& stats, const RasterConfig& raster) {
  if (!sample.chart) throw_input("train: sample '" + sample.id + "' has no chart");
  const Chart& chart = *sample.chart;
  if (static_cast<int>(sample.q_init.size()) != chart.num_vertices() ||
      static_cast<int>(sample.q_gt.size()) != chart.num_vertices()) {
    throw_input("train: sample '" + sample.id + "' uv count does not match its chart");
  }
  for (const auto* uv : {&sample.q_init, &sample.q_gt}) {
    for (const Vec2& q : *uv) {
      if (!q.allFinite()) throw_numerical("train: non-finite uv in sample '" + sample.id + "'");
    }
  }
  PreparedSample p;
  p.source = &sample;
  p.q_aligned = align_to_reference(sample.q_init, sample.q_gt);
  p.pack = make_feature_pack(chart, p.q_aligned, stats);
  p.gt_image = rasterize_silhouette(chart, sample.q_gt, raster, false);
  for (const Face& t : chart.faces) {
    p.overlap_normalizer += std::abs(signed_area(p.q_aligned[t[0]], p.q_aligned[t[1]], p.q_aligned[t[2]]));
  }
  return p;
}

namespace {

LossOptions loss_options(const TrainConfig& config, const PreparedSample& p) {
  LossOptions o;
  o.weights = config.weights;
  o.raster = config.raster;
  o.overlap_normalizer = p.overlap_normalizer;
  o.gt_image = &p.gt_image;
  return o;
}

std::vector<Vec2> add_offsets(std::span<const Vec2> q, const Matrix& offsets) {
  std::vector<Vec2> out(q.begin(), q.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += offsets.row(static_cast<Eigen::Index>(i)).transpose();
  return out;
}

struct SampleResult {
  LossReport report;
  std::vector<Matrix> grads;
};

SampleResult run_sample(const RefinerParams& params, const PreparedSample& p, const TrainConfig& config) {
  SampleResult r;
  const Chart& chart = *p.source->chart;
  const LossOptions opts = loss_options(config, p);
  BackwardResult br = forward_backward(params, p.pack, [&](const Matrix& offsets) {
    const auto q_pred = add_offsets(p.q_aligned, offsets);
    r.report = total_loss(chart, q_pred, p.source->q_gt, opts);
    if (!std::isfinite(r.report.total)) throw_numerical("train: non-finite loss on sample '" + p.source->id + "'");
    return to_matrix(r.report.grad);
  });
  r.grads = std::move(br.grads);
  return r;
}

struct Adam {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  long t = 0;

  explicit Adam(const RefinerParams& params) {
    for (const auto& x : params.tensors) {
      m.push_back(Matrix::Zero(x.rows(), x.cols()));
      v.push_back(Matrix::Zero(x.rows(), x.cols()));
    }
  }

  void step(RefinerParams& params, const std::vector<Matrix>& grads, const TrainConfig& c) {
    ++t;
    const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.tensors.size(); ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * grads[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * grads[i].cwiseAbs2();
      const Matrix mhat = m[i] / bc1;
      const Matrix vhat = v[i] / bc2;
      params.tensors[i].array() -= c.lr * mhat.array() / (vhat.array().sqrt() + c.eps);
    }
  }
};

}  // namespace

TrainResult train(std::span<const TrainSample> dataset, const TrainConfig& config, const ModelConfig* model) {
  config.validate();
  if (dataset.empty()) throw_input("train: empty dataset");
  std::vector<const Chart*> charts;
  for (const auto& s : dataset) {
    if (!s.chart) throw_input("train: sample '" + s.id + "' has no chart");
    charts.push_back(s.chart.get());
  }
  const FeatureStats stats = compute_feature_stats(charts);
  std::vector<PreparedSample> prepared;
  prepared.reserve(dataset.size());
  for (const auto& s : dataset) prepared.push_back(prepare_sample(s, stats, config.raster));

  const ModelConfig mc = model ? *model : ModelConfig::scaled(config.width_divisor);
  Rng rng(config.seed);
  TrainResult result;
  result.params = init_params(mc, rng.next(), stats);
  Adam adam(result.params);

  const int n = static_cast<int>(dataset.size());
  const int batch = std::min(config.batch_size, n);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  int cursor = n;
  std::vector<SampleResult> slots(batch);
  std::vector<int> members(batch);

  for (int step = 1; step <= config.steps; ++step) {
    for (int b = 0; b < batch; ++b) {
      if (cursor == n) {
        rng.shuffle(perm.begin(), perm.end());
        cursor = 0;
      }
      members[b] = perm[cursor++];
    }
    auto work = [&](int b) { slots[b] = run_sample(result.params, prepared[members[b]], config); };
    const int threads = std::min(config.threads, batch);
    if (threads <= 1) {
      for (int b = 0; b < batch; ++b) work(b);
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(threads);
      for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
          try {
            for (int b = w; b < batch; b += threads) work(b);
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& th : pool) th.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }

    HistoryRow row;
    row.step = step;
    std::vector<Matrix> grads = slots[0].grads;
    for (int b = 1; b < batch; ++b) {
      for (std::size_t i = 0; i < grads.size(); ++i) grads[i] += slots[b].grads[i];
    }
    const double inv = 1.0 / batch;
    for (auto& g : grads) g *= inv;
    for (int b = 0; b < batch; ++b) {
      const LossReport& r = slots[b].report;
      row.recon += r.recon * inv;
      row.silhouette += r.silhouette * inv;
      row.distortion += r.distortion * inv;
      row.overlap_soft += r.overlap_soft * inv;
      row.overlap_count += r.overlap_count;
      row.total += r.total * inv;
    }
    result.history.push_back(row);
    adam.step(result.params, grads, config);
    if (!result.params.all_finite()) {
      throw_numerical("train: non-finite parameters after step " + std::to_string(step));
    }
  }
  return result;
}

std::vector<Vec2> predict(const RefinerParams& params, const Chart& chart, std::span<const Vec2> q_init) {
  const FeaturePack pack = make_feature_pack(chart, q_init, params.stats);
  return add_offsets(q_init, forward(params, pack).offsets);
}

EvalSummary evaluate(const RefinerParams& params, std::span<const TrainSample> samples, const TrainConfig& config) {
  EvalSummary s;
  if (samples.empty()) return s;
  for (const auto& sample : samples) {
    const PreparedSample p = prepare_sample(sample, params.stats, config.raster);
    const auto q_pred = add_offsets(p.q_aligned, forward(params, p.pack).offsets);
    const LossReport r = total_loss(*sample.chart, q_pred, sample.q_gt, loss_options(config, p));
    s.flipped_faces += r.overlap_count;
    s.mean_distortion += distortion_metric(*sample.chart, q_pred);
    s.mean_total += r.total;
  }
  s.mean_distortion /= static_cast<double>(samples.size());
  s.mean_total /= static_cast<double>(samples.size());
  return s;
}

std::string format_history_csv(std::span<const HistoryRow> history) {
  std::ostringstream out;
  out << "step,recon,silhouette,distortion,overlap_soft,overlap_count,total\n";
  char buf[512];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%d,%.17g\n", r.step, r.recon, r.silhouette,
                  r.distortion, r.overlap_soft, r.overlap_count, r.total);
    out << buf;
  }
  return out.str();
}

void write_history_csv(const std::filesystem::path& path, std::span<const HistoryRow> history) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw_input("cannot write " + path.string());
  f << format_history_csv(history);
}

}  // namespace uvkit
