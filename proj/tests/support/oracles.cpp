#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace uvkit::oracle {

Points fd_gradient(const std::function<double(const Points&)>& f, Points x, double h) {
  Points g(x.size(), Vec2::Zero());
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (int k = 0; k < 2; ++k) {
      const double keep = x[i][k];
      x[i][k] = keep + h;
      const double fp = f(x);
      x[i][k] = keep - h;
      const double fm = f(x);
      x[i][k] = keep;
      g[i][k] = (fp - fm) / (2.0 * h);
    }
  }
  return g;
}

Eigen::MatrixXd fd_gradient(const std::function<double(const Eigen::MatrixXd&)>& f, Eigen::MatrixXd x, double h) {
  Eigen::MatrixXd g(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double keep = x(i);
    x(i) = keep + h;
    const double fp = f(x);
    x(i) = keep - h;
    const double fm = f(x);
    x(i) = keep;
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

double max_rel_error(std::span<const Vec2> a, std::span<const Vec2> b, double floor) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, (a[i] - b[i]).cwiseAbs().maxCoeff());
    den = std::max(den, b[i].cwiseAbs().maxCoeff());
  }
  return num / std::max(den, floor);
}

double max_rel_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double floor) {
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff() / std::max(b.cwiseAbs().maxCoeff(), floor);
}

std::shared_ptr<const Chart> grid_chart(int nx, int ny, const std::function<double(double, double)>& height,
                                        Rng* rng) {
  std::vector<Vec3> pos;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double x = static_cast<double>(i) / (nx - 1);
      const double y = static_cast<double>(j) / (ny - 1);
      pos.emplace_back(x, y, height ? height(x, y) : 0.0);
    }
  }
  std::vector<Face> faces;
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      const int a = j * nx + i;
      const int b = a + 1;
      const int c = a + nx + 1;
      const int d = a + nx;
      if (rng && rng->below(2) == 1) {
        faces.push_back({a, b, d});
        faces.push_back({b, c, d});
      } else {
        faces.push_back({a, b, c});
        faces.push_back({a, c, d});
      }
    }
  }
  return std::make_shared<const Chart>(make_chart(std::move(pos), std::move(faces)));
}

Points grid_uv(const Chart& chart) {
  Points uv;
  uv.reserve(chart.positions.size());
  for (const Vec3& p : chart.positions) uv.emplace_back(p.x(), p.y());
  return uv;
}

Points jittered_grid_uv(const Chart& chart, int nx, int ny, double amount, Rng& rng) {
  Points uv = grid_uv(chart);
  const double cell = 1.0 / std::max(nx - 1, ny - 1);
  for (int j = 1; j + 1 < ny; ++j) {
    for (int i = 1; i + 1 < nx; ++i) {
      Vec2& p = uv[j * nx + i];
      p.x() += amount * cell * rng.uniform(-1.0, 1.0);
      p.y() += amount * cell * rng.uniform(-1.0, 1.0);
    }
  }
  return uv;
}

int orientation_flips(const Chart& chart, std::span<const Vec2> uv) {
  int n = 0;
  for (const Face& t : chart.faces) {
    const Vec2 e1 = uv[t[1]] - uv[t[0]];
    const Vec2 e2 = uv[t[2]] - uv[t[0]];
    if (e1.x() * e2.y() - e1.y() * e2.x() < 0.0) ++n;
  }
  return n;
}

namespace {

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

double polygon_area(const std::vector<Vec2>& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    a += p.x() * q.y() - p.y() * q.x();
  }
  return 0.5 * a;
}

Tri2 ccw(Tri2 t) {
  if (cross(t[0], t[1], t[2]) < 0.0) std::swap(t[1], t[2]);
  return t;
}

double tri_area(const Tri2& t) { return 0.5 * std::abs(cross(t[0], t[1], t[2])); }

}  // namespace

double clipped_area(const Tri2& a_in, const Tri2& b_in) {
  if (tri_area(a_in) == 0.0 || tri_area(b_in) == 0.0) return 0.0;
  const Tri2 a = ccw(a_in);
  const Tri2 b = ccw(b_in);
  std::vector<Vec2> poly(a.begin(), a.end());
  for (int e = 0; e < 3 && !poly.empty(); ++e) {
    const Vec2& p0 = b[e];
    const Vec2& p1 = b[(e + 1) % 3];
    std::vector<Vec2> next;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Vec2& s = poly[i];
      const Vec2& t = poly[(i + 1) % poly.size()];
      const double ds = cross(p0, p1, s);
      const double dt = cross(p0, p1, t);
      if (ds >= 0.0) next.push_back(s);
      if ((ds >= 0.0) != (dt >= 0.0)) {
        const double u = ds / (ds - dt);
        next.push_back(s + u * (t - s));
      }
    }
    poly = std::move(next);
  }
  return poly.size() < 3 ? 0.0 : std::abs(polygon_area(poly));
}

std::vector<Tri2> uv_triangles(const Chart& chart, std::span<const Vec2> uv) {
  std::vector<Tri2> tris;
  tris.reserve(chart.faces.size());
  for (const Face& t : chart.faces) tris.push_back({uv[t[0]], uv[t[1]], uv[t[2]]});
  return tris;
}

namespace {

double mean_area(std::span<const Tri2> tris) {
  double s = 0.0;
  for (const Tri2& t : tris) s += tri_area(t);
  return tris.empty() ? 0.0 : s / static_cast<double>(tris.size());
}

}  // namespace

std::vector<bool> brute_overlap(std::span<const Tri2> tris, double area_tol) {
  const double tol = area_tol * mean_area(tris);
  std::vector<bool> hit(tris.size(), false);
  for (std::size_t i = 0; i < tris.size(); ++i) {
    if (cross(tris[i][0], tris[i][1], tris[i][2]) < 0.0) hit[i] = true;
  }
  for (std::size_t i = 0; i < tris.size(); ++i) {
    for (std::size_t j = i + 1; j < tris.size(); ++j) {
      if (clipped_area(tris[i], tris[j]) > tol) hit[i] = hit[j] = true;
    }
  }
  return hit;
}

bool any_pair_intersects(std::span<const Tri2> tris, double area_tol) {
  const double tol = area_tol * mean_area(tris);
  for (std::size_t i = 0; i < tris.size(); ++i) {
    for (std::size_t j = i + 1; j < tris.size(); ++j) {
      if (clipped_area(tris[i], tris[j]) > tol) return true;
    }
  }
  return false;
}

double scan_min_bbox_area(std::span<const Vec2> pts, int samples) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) {
    const double a = std::acos(-1.0) * k / samples;
    const double c = std::cos(a);
    const double s = std::sin(a);
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const Vec2& p : pts) {
      const double x = c * p.x() - s * p.y();
      const double y = s * p.x() + c * p.y();
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
    best = std::min(best, (x1 - x0) * (y1 - y0));
  }
  return best;
}

std::vector<std::vector<double>> all_pairs_edge_distance(const Mesh& mesh) {
  const int n = mesh.num_vertices();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
  for (int i = 0; i < n; ++i) d[i][i] = 0.0;
  for (const Face& t : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      const int a = t[k];
      const int b = t[(k + 1) % 3];
      const double len = (mesh.vertices[a] - mesh.vertices[b]).norm();
      d[a][b] = d[b][a] = std::min(d[a][b], len);
    }
  }
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    }
  }
  return d;
}

int boundary_edge_count(const Chart& chart) {
  std::map<std::pair<int, int>, int> count;
  for (const Face& t : chart.faces) {
    for (int k = 0; k < 3; ++k) {
      const int a = t[k];
      const int b = t[(k + 1) % 3];
      ++count[{std::min(a, b), std::max(a, b)}];
    }
  }
  int n = 0;
  for (const auto& [e, c] : count) n += c == 1 ? 1 : 0;
  return n;
}

std::string pack_violation(const UvAtlas& atlas, double scale_tol) {
  const double eps = 1e-12;
  const double half = 0.5 * atlas.margin;
  std::vector<Vec2> lo, hi;
  std::vector<double> ratio;
  for (std::size_t i = 0; i < atlas.islands.size(); ++i) {
    const PlacedIsland& p = atlas.islands[i];
    Vec2 a = p.uv.front(), b = p.uv.front();
    for (const Vec2& q : p.uv) {
      if (q.x() < -eps || q.y() < -eps || q.x() > 1 + eps || q.y() > 1 + eps) {
        return "island " + std::to_string(i) + " leaves the unit square";
      }
      a = a.cwiseMin(q);
      b = b.cwiseMax(q);
    }
    lo.push_back(a - Vec2::Constant(half));
    hi.push_back(b + Vec2::Constant(half));
    double a2 = 0.0;
    for (const Tri2& t : uv_triangles(*p.island.chart, p.uv)) a2 += tri_area(t);
    ratio.push_back(a2 / p.island.chart->surface_area());
  }
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (std::abs(ratio[i] / ratio[0] - 1.0) > scale_tol) {
      return "island " + std::to_string(i) + " breaks relative scale";
    }
    for (std::size_t j = i + 1; j < lo.size(); ++j) {
      const bool apart = hi[i].x() <= lo[j].x() + eps || hi[j].x() <= lo[i].x() + eps ||
                         hi[i].y() <= lo[j].y() + eps || hi[j].y() <= lo[i].y() + eps;
      if (!apart) return "islands " + std::to_string(i) + " and " + std::to_string(j) + " are too close";
    }
  }
  for (std::size_t i = 0; i < atlas.islands.size(); ++i) {
    const auto ti = uv_triangles(*atlas.islands[i].island.chart, atlas.islands[i].uv);
    for (std::size_t j = i + 1; j < atlas.islands.size(); ++j) {
      const auto tj = uv_triangles(*atlas.islands[j].island.chart, atlas.islands[j].uv);
      for (const Tri2& a : ti) {
        for (const Tri2& b : tj) {
          if (clipped_area(a, b) > 0.0) return "islands " + std::to_string(i) + " and " + std::to_string(j) + " intersect";
        }
      }
    }
  }
  return {};
}

}  // namespace uvkit::oracle
