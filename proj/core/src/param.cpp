#include "uvkit/param.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <set>

#include <Eigen/SVD>
#include <Eigen/SparseCholesky>

#include "uvkit/error.hpp"

namespace uvkit {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

std::vector<int> sorted_boundary_vertices(const Chart& chart) {
  std::set<int> unique;
  for (const auto& loop : chart.boundary_loops) unique.insert(loop.begin(), loop.end());
  return {unique.begin(), unique.end()};
}

template <typename Solver>
void factorize_or_throw(Solver& solver, const SpMat& m, const char* what) {
  solver.compute(m);
  if (solver.info() != Eigen::Success) throw_numerical(std::string(what) + ": factorization failed");
}

}  // namespace

UvChart make_uv_chart(std::shared_ptr<const Chart> chart, std::vector<Vec2> uv) {
  if (!chart) throw_invariant("uv chart without a chart");
  if (static_cast<int>(uv.size()) != chart->num_vertices()) {
    throw_invariant("uv count does not match chart vertex count");
  }
  for (const Vec2& p : uv) {
    if (!p.allFinite()) throw_numerical("non-finite uv coordinate");
  }
  UvChart out;
  out.chart = std::move(chart);
  out.uv = std::move(uv);
  return out;
}

std::array<Vec2, 3> local_frame(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 e1 = (b - a).normalized();
  const Vec3 n = (b - a).cross(c - a);
  const Vec3 e2 = n.cross(e1).normalized();
  return {Vec2::Zero(), Vec2((b - a).norm(), 0.0), Vec2((c - a).dot(e1), (c - a).dot(e2))};
}

UvChart tutte_embed(std::shared_ptr<const Chart> chart_ptr) {
  const Chart& chart = *chart_ptr;
  if (!chart.is_disk()) throw_input("Tutte embedding requires a disk chart");
  const auto& loop = chart.boundary_loops.front();
  if (loop.size() < 3) throw_input("Tutte embedding needs at least 3 boundary vertices");

  const int n = chart.num_vertices();
  std::vector<Vec2> uv(n, Vec2::Zero());
  std::vector<double> arc(loop.size() + 1, 0.0);
  for (std::size_t k = 0; k < loop.size(); ++k) {
    arc[k + 1] = arc[k] + (chart.positions[loop[(k + 1) % loop.size()]] - chart.positions[loop[k]]).norm();
  }
  std::vector<bool> fixed(n, false);
  for (std::size_t k = 0; k < loop.size(); ++k) {
    const double angle = 2.0 * std::numbers::pi * arc[k] / arc.back();
    uv[loop[k]] = Vec2(std::cos(angle), std::sin(angle));
    fixed[loop[k]] = true;
  }

  std::vector<int> unknown(n, -1);
  int m = 0;
  for (int v = 0; v < n; ++v) {
    if (!fixed[v]) unknown[v] = m++;
  }
  if (m == 0) return make_uv_chart(std::move(chart_ptr), std::move(uv));

  const auto neighbors = vertex_neighbors(n, chart.faces);
  std::vector<Triplet> triplets;
  Eigen::MatrixX2d rhs = Eigen::MatrixX2d::Zero(m, 2);
  for (int v = 0; v < n; ++v) {
    if (fixed[v]) continue;
    const int row = unknown[v];
    triplets.emplace_back(row, row, static_cast<double>(neighbors[v].size()));
    for (int w : neighbors[v]) {
      if (fixed[w]) {
        rhs.row(row) += uv[w].transpose();
      } else {
        triplets.emplace_back(row, unknown[w], -1.0);
      }
    }
  }
  SpMat lap(m, m);
  lap.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SimplicialLDLT<SpMat> solver;
  factorize_or_throw(solver, lap, "Tutte embedding");
  const Eigen::MatrixX2d x = solver.solve(rhs);
  for (int v = 0; v < n; ++v) {
    if (!fixed[v]) uv[v] = x.row(unknown[v]).transpose();
  }
  return make_uv_chart(std::move(chart_ptr), std::move(uv));
}

namespace {

// Complex coefficients W_j of the per-face conformality residual
// Σ_j W_j U_j, scaled by 1/sqrt(2A).
std::array<std::complex<double>, 3> lscm_coefficients(const Chart& chart, const Face& t) {
  const auto p = local_frame(chart.positions[t[0]], chart.positions[t[1]], chart.positions[t[2]]);
  const std::complex<double> z[3] = {{p[0].x(), p[0].y()}, {p[1].x(), p[1].y()}, {p[2].x(), p[2].y()}};
  const double twice_area = p[1].x() * p[2].y();
  if (!(twice_area > 0.0)) return {0.0, 0.0, 0.0};
  const double scale = 1.0 / std::sqrt(twice_area);
  return {(z[2] - z[1]) * scale, (z[0] - z[2]) * scale, (z[1] - z[0]) * scale};
}

}  // namespace

double conformal_energy(const Chart& chart, std::span<const Vec2> uv) {
  double energy = 0.0;
  for (const Face& t : chart.faces) {
    const auto w = lscm_coefficients(chart, t);
    std::complex<double> r = 0.0;
    for (int j = 0; j < 3; ++j) r += w[j] * std::complex<double>(uv[t[j]].x(), uv[t[j]].y());
    energy += std::norm(r);
  }
  return energy;
}

UvChart lscm(std::shared_ptr<const Chart> chart_ptr, int pin_a, int pin_b) {
  const Chart& chart = *chart_ptr;
  const int n = chart.num_vertices();
  if (pin_a == pin_b) throw_input("LSCM pins must be distinct vertices");
  if (pin_a < 0 || pin_b < 0 || pin_a >= n || pin_b >= n) throw_input("LSCM pin out of range");

  // Unknowns: (u, v) of every non-pinned vertex.
  std::vector<int> column(n, -1);
  int m = 0;
  for (int v = 0; v < n; ++v) {
    if (v != pin_a && v != pin_b) column[v] = m++;
  }
  std::vector<Vec2> pinned(n, Vec2::Zero());
  pinned[pin_b] = Vec2(1.0, 0.0);

  std::vector<Triplet> triplets;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * chart.num_faces());
  bool any_face = false;
  for (int f = 0; f < chart.num_faces(); ++f) {
    const Face& t = chart.faces[f];
    const auto w = lscm_coefficients(chart, t);
    const int re = 2 * f;
    const int im = 2 * f + 1;
    for (int j = 0; j < 3; ++j) {
      const double wr = w[j].real();
      const double wi = w[j].imag();
      if (wr != 0.0 || wi != 0.0) any_face = true;
      const int v = t[j];
      if (column[v] < 0) {
        rhs[re] -= wr * pinned[v].x() - wi * pinned[v].y();
        rhs[im] -= wi * pinned[v].x() + wr * pinned[v].y();
      } else {
        triplets.emplace_back(re, 2 * column[v], wr);
        triplets.emplace_back(re, 2 * column[v] + 1, -wi);
        triplets.emplace_back(im, 2 * column[v], wi);
        triplets.emplace_back(im, 2 * column[v] + 1, wr);
      }
    }
  }
  if (!any_face) throw_numerical("LSCM system is rank deficient: every face is degenerate");

  std::vector<Vec2> uv = pinned;
  if (m > 0) {
    SpMat a(2 * chart.num_faces(), 2 * m);
    a.setFromTriplets(triplets.begin(), triplets.end());
    const SpMat normal = SpMat(a.transpose() * a);
    Eigen::SimplicialLDLT<SpMat> solver;
    factorize_or_throw(solver, normal, "LSCM");
    const Eigen::VectorXd x = solver.solve(a.transpose() * rhs);
    if (solver.info() != Eigen::Success || !x.allFinite()) {
      throw_numerical("LSCM solve failed (rank deficient system)");
    }
    for (int v = 0; v < n; ++v) {
      if (column[v] >= 0) uv[v] = Vec2(x[2 * column[v]], x[2 * column[v] + 1]);
    }
  }
  return make_uv_chart(std::move(chart_ptr), std::move(uv));
}

std::pair<int, int> default_pins(const Chart& chart) {
  const auto boundary = sorted_boundary_vertices(chart);
  if (boundary.size() < 2) throw_input("chart has fewer than 2 boundary vertices");
  auto dist2 = [&](int a, int b) { return (chart.positions[a] - chart.positions[b]).squaredNorm(); };

  if (boundary.size() <= 2000) {
    std::pair<int, int> best{boundary[0], boundary[1]};
    double best_d = -1.0;
    for (std::size_t i = 0; i < boundary.size(); ++i) {
      for (std::size_t j = i + 1; j < boundary.size(); ++j) {
        const double d = dist2(boundary[i], boundary[j]);
        if (d > best_d) {
          best_d = d;
          best = {boundary[i], boundary[j]};
        }
      }
    }
    return best;
  }
  auto farthest_from = [&](int from) {
    int best = boundary[0];
    double best_d = -1.0;
    for (int v : boundary) {
      if (const double d = dist2(from, v); d > best_d) {
        best_d = d;
        best = v;
      }
    }
    return best;
  };
  const int a = farthest_from(boundary[0]);
  const int b = farthest_from(a);
  return {std::min(a, b), std::max(a, b)};
}

std::vector<Vec2> normalize_points(std::span<const Vec2> uv) {
  if (uv.empty()) throw_input("cannot normalize an empty uv set");
  Vec2 lo = uv[0];
  Vec2 hi = uv[0];
  for (const Vec2& p : uv) {
    if (!p.allFinite()) throw_numerical("non-finite uv coordinate");
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec2 extent = hi - lo;
  const double longest = extent.maxCoeff();
  if (!(longest > 0.0)) throw_input("cannot normalize uv: all points coincide (zero extent)");
  const double scale = 1.0 / longest;
  const Vec2 offset = (Vec2::Ones() - extent * scale) / 2.0;
  std::vector<Vec2> out;
  out.reserve(uv.size());
  for (const Vec2& p : uv) {
    out.push_back(((p - lo) * scale + offset).cwiseMax(0.0).cwiseMin(1.0));
  }
  return out;
}

UvChart normalize_uv(const UvChart& uv) {
  UvChart out = uv;
  out.uv = normalize_points(uv.uv);
  out.normalized = true;
  return out;
}

int count_flipped(const Chart& chart, std::span<const Vec2> uv) {
  int flipped = 0;
  for (const Face& t : chart.faces) {
    if (signed_area(uv[t[0]], uv[t[1]], uv[t[2]]) < 0.0) ++flipped;
  }
  return flipped;
}

UvChart arap_refine(const UvChart& input, int iterations) {
  if (iterations <= 0) return input;
  const Chart& chart = *input.chart;
  const int n = chart.num_vertices();
  const int nf = chart.num_faces();

  struct HalfEdge {
    int i, j;
    double w;
    Vec2 rest;  // x_i − x_j in the face frame
  };
  std::vector<std::array<HalfEdge, 3>> face_edges(nf);
  for (int f = 0; f < nf; ++f) {
    const Face& t = chart.faces[f];
    const auto x = local_frame(chart.positions[t[0]], chart.positions[t[1]], chart.positions[t[2]]);
    for (int k = 0; k < 3; ++k) {
      const int i = (k + 1) % 3;
      const int j = (k + 2) % 3;
      const Vec2 a = x[i] - x[k];
      const Vec2 b = x[j] - x[k];
      const double cross = a.x() * b.y() - a.y() * b.x();
      const double cot = std::abs(cross) > 0.0 ? a.dot(b) / std::abs(cross) : 0.0;
      face_edges[f][k] = {t[i], t[j], std::max(0.5 * cot, 1e-6), x[i] - x[j]};
    }
  }

  // Vertex 0 is held in place to remove the translation null space.
  std::vector<Triplet> triplets;
  for (const auto& edges : face_edges) {
    for (const HalfEdge& e : edges) {
      const std::array<std::tuple<int, int, double>, 4> entries{
          {{e.i, e.i, 1.0}, {e.j, e.j, 1.0}, {e.i, e.j, -1.0}, {e.j, e.i, -1.0}}};
      for (const auto& [r, c, s] : entries) {
        if (r == 0 || c == 0) continue;
        triplets.emplace_back(r - 1, c - 1, s * e.w);
      }
    }
  }
  if (n < 2) return input;
  SpMat lap(n - 1, n - 1);
  lap.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::SimplicialLDLT<SpMat> solver;
  factorize_or_throw(solver, lap, "ARAP");

  std::vector<Vec2> uv = input.uv;
  for (int it = 0; it < iterations; ++it) {
    Eigen::MatrixX2d rhs = Eigen::MatrixX2d::Zero(n - 1, 2);
    for (const auto& edges : face_edges) {
      Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
      for (const HalfEdge& e : edges) cov += e.w * (uv[e.i] - uv[e.j]) * e.rest.transpose();
      Eigen::JacobiSVD<Eigen::Matrix2d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
      Eigen::Matrix2d s = Eigen::Matrix2d::Identity();
      s(1, 1) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
      const Eigen::Matrix2d rot = svd.matrixU() * s * svd.matrixV().transpose();
      for (const HalfEdge& e : edges) {
        const Vec2 target = e.w * rot * e.rest;
        if (e.i != 0) rhs.row(e.i - 1) += target.transpose();
        if (e.j != 0) rhs.row(e.j - 1) -= target.transpose();
        if (e.i == 0 && e.j != 0) rhs.row(e.j - 1) += e.w * uv[0].transpose();
        if (e.j == 0 && e.i != 0) rhs.row(e.i - 1) += e.w * uv[0].transpose();
      }
    }
    const Eigen::MatrixX2d x = solver.solve(rhs);
    if (!x.allFinite()) throw_numerical("ARAP iteration produced non-finite coordinates");
    for (int v = 1; v < n; ++v) uv[v] = x.row(v - 1).transpose();
  }
  return make_uv_chart(input.chart, std::move(uv));
}

InitResult initial_uv(std::shared_ptr<const Chart> chart, const InitOptions& opts) {
  InitResult result;
  bool need_fallback = false;
  try {
    const auto [a, b] = default_pins(*chart);
    result.uv = lscm(chart, a, b);
    need_fallback = count_flipped(*chart, result.uv.uv) > 0;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::numerical || !chart->is_disk()) throw;
    need_fallback = true;
  }
  if (need_fallback && chart->is_disk()) {
    result.uv = tutte_embed(chart);
    result.method = InitMethod::tutte;
  }
  result.uv = arap_refine(result.uv, opts.arap_iterations);
  result.uv = normalize_uv(result.uv);
  return result;
}

}  // namespace uvkit
