#include "uvkit/geometry2d.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace uvkit {

namespace {

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

double tri_area(const Tri2& t) { return 0.5 * cross(t[0], t[1], t[2]); }

double extent(const Tri2& t) {
  const Vec2 lo = t[0].cwiseMin(t[1]).cwiseMin(t[2]);
  const Vec2 hi = t[0].cwiseMax(t[1]).cwiseMax(t[2]);
  return (hi - lo).maxCoeff();
}

// Clips `poly` to the half-plane left of a→b.
std::vector<Vec2> clip(const std::vector<Vec2>& poly, const Vec2& a, const Vec2& b) {
  std::vector<Vec2> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % n];
    const double dp = cross(a, b, p);
    const double dq = cross(a, b, q);
    if (dp >= 0.0) out.push_back(p);
    if ((dp >= 0.0) != (dq >= 0.0)) {
      const double t = dp / (dp - dq);
      out.push_back(p + t * (q - p));
    }
  }
  return out;
}

}  // namespace

std::vector<int> convex_hull(std::span<const Vec2> pts) {
  const int n = static_cast<int>(pts.size());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (pts[a].x() != pts[b].x()) return pts[a].x() < pts[b].x();
    if (pts[a].y() != pts[b].y()) return pts[a].y() < pts[b].y();
    return a < b;
  });
  idx.erase(std::unique(idx.begin(), idx.end(), [&](int a, int b) { return pts[a] == pts[b]; }), idx.end());
  if (idx.size() < 3) return idx;
  std::vector<int> hull(2 * idx.size());
  std::size_t k = 0;
  for (int i : idx) {
    while (k >= 2 && cross(pts[hull[k - 2]], pts[hull[k - 1]], pts[i]) <= 0.0) --k;
    hull[k++] = i;
  }
  for (std::size_t j = idx.size() - 1, t = k + 1; j-- > 0;) {
    const int i = idx[j];
    while (k >= t && cross(pts[hull[k - 2]], pts[hull[k - 1]], pts[i]) <= 0.0) --k;
    hull[k++] = i;
  }
  hull.resize(k - 1);
  return hull;
}

bool triangles_overlap(const Tri2& a, const Tri2& b, double rel_eps) {
  if (tri_area(a) == 0.0 || tri_area(b) == 0.0) return false;
  const double tol = rel_eps * std::max(extent(a), extent(b));
  for (const Tri2* t : {&a, &b}) {
    for (int e = 0; e < 3; ++e) {
      const Vec2 d = (*t)[(e + 1) % 3] - (*t)[e];
      const double len = d.norm();
      if (len == 0.0) continue;
      const Vec2 axis(-d.y() / len, d.x() / len);
      double amin = axis.dot(a[0]), amax = amin;
      double bmin = axis.dot(b[0]), bmax = bmin;
      for (int k = 1; k < 3; ++k) {
        amin = std::min(amin, axis.dot(a[k]));
        amax = std::max(amax, axis.dot(a[k]));
        bmin = std::min(bmin, axis.dot(b[k]));
        bmax = std::max(bmax, axis.dot(b[k]));
      }
      if (std::min(amax, bmax) - std::max(amin, bmin) <= tol) return false;
    }
  }
  return true;
}

double triangle_intersection_area(const Tri2& a, const Tri2& b) {
  auto ccw = [](Tri2 t) {
    if (tri_area(t) < 0.0) std::swap(t[1], t[2]);
    return t;
  };
  const Tri2 ta = ccw(a);
  const Tri2 tb = ccw(b);
  if (tri_area(ta) == 0.0 || tri_area(tb) == 0.0) return 0.0;
  std::vector<Vec2> poly(ta.begin(), ta.end());
  for (int e = 0; e < 3 && !poly.empty(); ++e) poly = clip(poly, tb[e], tb[(e + 1) % 3]);
  double area = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    area += p.x() * q.y() - p.y() * q.x();
  }
  return std::abs(0.5 * area);
}

Aabb2 bounding_box(std::span<const Vec2> pts) {
  Aabb2 box;
  if (pts.empty()) return box;
  box.min = box.max = pts[0];
  for (const Vec2& p : pts) {
    box.min = box.min.cwiseMin(p);
    box.max = box.max.cwiseMax(p);
  }
  return box;
}

std::vector<bool> overlapping_triangles(std::span<const Tri2> tris) {
  const int n = static_cast<int>(tris.size());
  std::vector<bool> hit(n, false);
  if (n < 2) return hit;
  std::vector<Vec2> corners;
  corners.reserve(3 * tris.size());
  for (const Tri2& t : tris) corners.insert(corners.end(), t.begin(), t.end());
  const Aabb2 box = bounding_box(corners);
  const int cells = std::clamp(static_cast<int>(std::sqrt(static_cast<double>(n))), 1, 1024);
  const double w = std::max(box.width(), 1e-300);
  const double h = std::max(box.height(), 1e-300);
  auto cell_x = [&](double x) { return std::clamp(static_cast<int>((x - box.min.x()) / w * cells), 0, cells - 1); };
  auto cell_y = [&](double y) { return std::clamp(static_cast<int>((y - box.min.y()) / h * cells), 0, cells - 1); };

  std::vector<std::vector<int>> grid(static_cast<std::size_t>(cells) * cells);
  std::vector<std::array<int, 4>> span(n);
  for (int i = 0; i < n; ++i) {
    const Vec2 lo = tris[i][0].cwiseMin(tris[i][1]).cwiseMin(tris[i][2]);
    const Vec2 hi = tris[i][0].cwiseMax(tris[i][1]).cwiseMax(tris[i][2]);
    span[i] = {cell_x(lo.x()), cell_y(lo.y()), cell_x(hi.x()), cell_y(hi.y())};
    for (int y = span[i][1]; y <= span[i][3]; ++y) {
      for (int x = span[i][0]; x <= span[i][2]; ++x) grid[static_cast<std::size_t>(y) * cells + x].push_back(i);
    }
  }
  std::vector<int> stamp(n, -1);
  for (int i = 0; i < n; ++i) {
    for (int y = span[i][1]; y <= span[i][3]; ++y) {
      for (int x = span[i][0]; x <= span[i][2]; ++x) {
        for (int j : grid[static_cast<std::size_t>(y) * cells + x]) {
          if (j <= i || stamp[j] == i) continue;
          stamp[j] = i;
          if (triangles_overlap(tris[i], tris[j])) hit[i] = hit[j] = true;
        }
      }
    }
  }
  return hit;
}

}  // namespace uvkit
