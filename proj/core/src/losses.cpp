#include "uvkit/losses.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>
#include <Eigen/SVD>
#include <json.hpp>

#include "uvkit/error.hpp"

namespace uvkit {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw_input(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs " +
                std::to_string(b) + ")");
  }
}

Vec2 centroid(std::span<const Vec2> pts) {
  Vec2 c = Vec2::Zero();
  for (const Vec2& p : pts) c += p;
  return c / static_cast<double>(pts.size());
}

}  // namespace

HornResult horn_align(std::span<const Vec2> q_src, std::span<const Vec2> q_dst) {
  require_same_length(q_src.size(), q_dst.size(), "horn_align");
  if (q_src.size() < 2) throw_input("horn_align needs at least 2 corresponding points");
  const Vec2 qc = centroid(q_src);
  const Vec2 pc = centroid(q_dst);
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  double spread = 0.0;
  for (std::size_t i = 0; i < q_src.size(); ++i) {
    const Vec2 q = q_src[i] - qc;
    const Vec2 p = q_dst[i] - pc;
    cov += p * q.transpose();
    spread += q.squaredNorm();
  }
  HornResult result;
  if (!(spread > 0.0) || cov.isZero(0.0)) {
    result.degenerate = true;
    return result;
  }
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix2d& u = svd.matrixU();
  const Eigen::Matrix2d vt = svd.matrixV().transpose();
  Eigen::Matrix2d s = Eigen::Matrix2d::Identity();
  s(1, 1) = u.determinant() * vt.determinant() < 0.0 ? -1.0 : 1.0;
  result.rotation.m = u * s * vt;
  return result;
}

std::vector<Vec2> align_to_reference(std::span<const Vec2> q_src, std::span<const Vec2> q_dst) {
  const HornResult horn = horn_align(q_src, q_dst);
  const Vec2 qc = centroid(q_src);
  std::vector<Vec2> rotated;
  rotated.reserve(q_src.size());
  for (const Vec2& q : q_src) rotated.push_back(horn.rotation.apply(q - qc));
  return normalize_points(rotated);
}

LossTerm recon_loss(std::span<const Vec2> q_pred, std::span<const Vec2> q_gt) {
  require_same_length(q_pred.size(), q_gt.size(), "recon_loss");
  LossTerm term;
  term.grad.assign(q_pred.size(), Vec2::Zero());
  if (q_pred.empty()) return term;
  const double inv_n = 1.0 / static_cast<double>(q_pred.size());
  auto sign = [](double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); };
  for (std::size_t i = 0; i < q_pred.size(); ++i) {
    const Vec2 d = q_pred[i] - q_gt[i];
    term.value += std::abs(d.x()) + std::abs(d.y());
    term.grad[i] = Vec2(sign(d.x()), sign(d.y())) * inv_n;
  }
  term.value *= inv_n;
  return term;
}

LossTerm silhouette_loss(const SilhouetteImage& pred, const SilhouetteImage& gt) {
  if (pred.resolution != gt.resolution) {
    throw_input("silhouette resolution mismatch (" + std::to_string(pred.resolution) + " vs " +
                std::to_string(gt.resolution) + ")");
  }
  LossTerm term;
  term.grad.assign(pred.num_vertices, Vec2::Zero());
  const std::size_t pixels = pred.coverage.size();
  if (pixels == 0) return term;
  const double inv_p = 1.0 / static_cast<double>(pixels);
  const bool has_grad = !pred.grad.empty();
  for (std::size_t i = 0; i < pixels; ++i) {
    const double diff = pred.coverage[i] - gt.coverage[i];
    term.value += diff * diff;
    if (has_grad && pred.grad[i].va >= 0) {
      const double scale = 2.0 * diff * inv_p;
      term.grad[pred.grad[i].va] += scale * pred.grad[i].d_a;
      term.grad[pred.grad[i].vb] += scale * pred.grad[i].d_b;
    }
  }
  term.value *= inv_p;
  return term;
}

FaceDistortion face_distortion(const std::array<Vec3, 3>& p, const std::array<Vec2, 3>& q) {
  const auto x = local_frame(p[0], p[1], p[2]);
  Eigen::Matrix2d rest;
  rest << x[1].x(), x[2].x(), x[1].y(), x[2].y();
  Eigen::Matrix2d mapped;
  mapped << q[1].x() - q[0].x(), q[2].x() - q[0].x(), q[1].y() - q[0].y(), q[2].y() - q[0].y();
  const Eigen::Matrix2d rest_inv = rest.inverse();
  const Eigen::Matrix2d jac = mapped * rest_inv;

  // |σ¹ − σ²| = 2·min(|conformal part|, |anti-conformal part|).
  const double a = jac(0, 0), b = jac(0, 1), c = jac(1, 0), d = jac(1, 1);
  const double e = 0.5 * (a + d), h = 0.5 * (c - b);
  const double f = 0.5 * (a - d), g = 0.5 * (c + b);
  const double conf = std::hypot(e, h);
  const double anti = std::hypot(f, g);

  FaceDistortion out;
  out.sigma_max = conf + anti;
  out.sigma_min = std::abs(conf - anti);
  out.value = 2.0 * std::min(conf, anti);

  Eigen::Matrix2d d_jac = Eigen::Matrix2d::Zero();
  if (anti <= conf) {
    if (anti > 0.0) d_jac << f / anti, g / anti, g / anti, -f / anti;
  } else if (conf > 0.0) {
    d_jac << e / conf, -h / conf, h / conf, e / conf;
  }
  const Eigen::Matrix2d d_mapped = d_jac * rest_inv.transpose();
  out.grad[1] = d_mapped.col(0);
  out.grad[2] = d_mapped.col(1);
  out.grad[0] = -(out.grad[1] + out.grad[2]);
  return out;
}

LossTerm distortion_loss(const Chart& chart, std::span<const Vec2> uv) {
  require_same_length(uv.size(), chart.positions.size(), "distortion_loss");
  LossTerm term;
  term.grad.assign(uv.size(), Vec2::Zero());
  double total_area = 0.0;
  std::vector<double> areas(chart.faces.size());
  for (std::size_t fi = 0; fi < chart.faces.size(); ++fi) {
    const Face& t = chart.faces[fi];
    areas[fi] = triangle_area(chart.positions[t[0]], chart.positions[t[1]], chart.positions[t[2]]);
    if (!(areas[fi] > 0.0)) throw_input("distortion_loss: face " + std::to_string(fi) + " has zero 3D area");
    total_area += areas[fi];
  }
  if (chart.faces.empty()) return term;
  for (std::size_t fi = 0; fi < chart.faces.size(); ++fi) {
    const Face& t = chart.faces[fi];
    const auto fd = face_distortion({chart.positions[t[0]], chart.positions[t[1]], chart.positions[t[2]]},
                                    {uv[t[0]], uv[t[1]], uv[t[2]]});
    const double w = areas[fi] / total_area;
    term.value += w * fd.value;
    for (int k = 0; k < 3; ++k) term.grad[t[k]] += w * fd.grad[k];
  }
  return term;
}

double distortion_metric(std::span<const std::array<Vec3, 3>> tri3, std::span<const std::array<Vec2, 3>> tri2) {
  require_same_length(tri3.size(), tri2.size(), "distortion_metric");
  double area3 = 0.0;
  double area2 = 0.0;
  for (std::size_t i = 0; i < tri3.size(); ++i) {
    area3 += triangle_area(tri3[i][0], tri3[i][1], tri3[i][2]);
    area2 += std::abs(signed_area(tri2[i][0], tri2[i][1], tri2[i][2]));
  }
  if (!(area3 > 0.0) || !(area2 > 0.0)) return 0.0;
  const double scale = std::sqrt(area3 / area2);
  double weighted = 0.0;
  for (std::size_t i = 0; i < tri3.size(); ++i) {
    const double a = triangle_area(tri3[i][0], tri3[i][1], tri3[i][2]);
    if (!(a > 0.0)) continue;
    const std::array<Vec2, 3> q{tri2[i][0] * scale, tri2[i][1] * scale, tri2[i][2] * scale};
    weighted += a * face_distortion(tri3[i], q).value;
  }
  return weighted / area3;
}

double distortion_metric(const Chart& chart, std::span<const Vec2> uv) {
  std::vector<std::array<Vec3, 3>> tri3;
  std::vector<std::array<Vec2, 3>> tri2;
  for (const Face& t : chart.faces) {
    tri3.push_back({chart.positions[t[0]], chart.positions[t[1]], chart.positions[t[2]]});
    tri2.push_back({uv[t[0]], uv[t[1]], uv[t[2]]});
  }
  return distortion_metric(tri3, tri2);
}

OverlapTerms overlap_terms(const Chart& chart, std::span<const Vec2> uv, double margin, double normalizer) {
  require_same_length(uv.size(), chart.positions.size(), "overlap_terms");
  OverlapTerms out;
  out.grad.assign(uv.size(), Vec2::Zero());
  if (!(normalizer > 0.0)) {
    normalizer = 0.0;
    for (const Face& t : chart.faces) normalizer += std::abs(signed_area(uv[t[0]], uv[t[1]], uv[t[2]]));
    if (!(normalizer > 0.0)) normalizer = 1.0;
  }
  for (const Face& t : chart.faces) {
    const Vec2& a = uv[t[0]];
    const Vec2& b = uv[t[1]];
    const Vec2& c = uv[t[2]];
    const double area = signed_area(a, b, c);
    if (area < 0.0) ++out.count;
    if (area < margin) {
      out.soft += (margin - area) / normalizer;
      // −∂A/∂corner, scaled.
      const double s = -0.5 / normalizer;
      out.grad[t[0]] += s * Vec2(b.y() - c.y(), c.x() - b.x());
      out.grad[t[1]] += s * Vec2(c.y() - a.y(), a.x() - c.x());
      out.grad[t[2]] += s * Vec2(a.y() - b.y(), b.x() - a.x());
    }
  }
  return out;
}

LossReport total_loss(const Chart& chart, std::span<const Vec2> q_pred, std::span<const Vec2> q_gt,
                      const LossOptions& opts) {
  require_same_length(q_pred.size(), q_gt.size(), "total_loss");
  require_same_length(q_pred.size(), chart.positions.size(), "total_loss");
  const LossWeights& w = opts.weights;
  LossReport report;
  report.grad.assign(q_pred.size(), Vec2::Zero());
  auto accumulate = [&](const std::vector<Vec2>& g, double weight) {
    if (weight == 0.0) return;
    for (std::size_t i = 0; i < g.size(); ++i) report.grad[i] += weight * g[i];
  };

  const LossTerm recon = recon_loss(q_pred, q_gt);
  report.recon = recon.value;
  accumulate(recon.grad, w.recon);

  const SilhouetteImage pred_img = rasterize_silhouette(chart, q_pred, opts.raster, w.silhouette != 0.0);
  SilhouetteImage gt_local;
  const SilhouetteImage* gt_img = opts.gt_image;
  if (gt_img == nullptr) {
    gt_local = rasterize_silhouette(chart, q_gt, opts.raster, false);
    gt_img = &gt_local;
  }
  const LossTerm sil = silhouette_loss(pred_img, *gt_img);
  report.silhouette = sil.value;
  accumulate(sil.grad, w.silhouette);

  const LossTerm dist = distortion_loss(chart, q_pred);
  report.distortion = dist.value;
  accumulate(dist.grad, w.distortion);

  double normalizer = opts.overlap_normalizer;
  if (!(normalizer > 0.0)) {
    normalizer = 0.0;
    for (const Face& t : chart.faces) normalizer += std::abs(signed_area(q_gt[t[0]], q_gt[t[1]], q_gt[t[2]]));
  }
  const OverlapTerms ov = overlap_terms(chart, q_pred, opts.overlap_margin, normalizer);
  report.overlap_soft = ov.soft;
  report.overlap_count = ov.count;
  accumulate(ov.grad, w.overlap);

  report.total = w.recon * report.recon + w.silhouette * report.silhouette +
                 w.distortion * report.distortion + w.overlap * report.overlap_soft;
  return report;
}

std::string format_loss_report_json(const LossReport& report, const LossWeights& weights) {
  nlohmann::json doc;
  doc["recon"] = report.recon;
  doc["silhouette"] = report.silhouette;
  doc["distortion"] = report.distortion;
  doc["overlap_soft"] = report.overlap_soft;
  doc["overlap_count"] = report.overlap_count;
  doc["total"] = report.total;
  doc["weights"] = {{"recon", weights.recon},
                    {"silhouette", weights.silhouette},
                    {"distortion", weights.distortion},
                    {"overlap", weights.overlap}};
  return doc.dump(2) + "\n";
}

}  // namespace uvkit
