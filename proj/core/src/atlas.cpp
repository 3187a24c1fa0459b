#include "uvkit/atlas.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "uvkit/error.hpp"

namespace uvkit {

namespace {

std::vector<Vec2> rotate_all(std::span<const Vec2> pts, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  std::vector<Vec2> out;
  out.reserve(pts.size());
  for (const Vec2& p : pts) out.emplace_back(c * p.x() - s * p.y(), s * p.x() + c * p.y());
  return out;
}

void translate_to_origin(std::vector<Vec2>& pts) {
  const Aabb2 box = bounding_box(pts);
  for (Vec2& p : pts) p -= box.min;
}

double uv_area(const Chart& chart, std::span<const Vec2> uv) {
  double a = 0.0;
  for (const Face& t : chart.faces) a += std::abs(signed_area(uv[t[0]], uv[t[1]], uv[t[2]]));
  return a;
}

struct Item {
  int index = 0;
  double w = 0.0;  // unscaled, after optional rotation
  double h = 0.0;
  bool rotated = false;
};

struct Slot {
  double x = 0.0;
  double y = 0.0;
};

// Next-fit shelves, items already sorted. Returns false when the layout
// exceeds the unit square.
bool shelf_layout(const std::vector<Item>& items, double g, double margin, std::vector<Slot>* slots) {
  double x = 0.0;
  double y = 0.0;
  double shelf_h = 0.0;
  if (slots) slots->assign(items.size(), {});
  for (std::size_t i = 0; i < items.size(); ++i) {
    const double cw = items[i].w * g + margin;
    const double ch = items[i].h * g + margin;
    if (cw > 1.0 || ch > 1.0) return false;
    if (x + cw > 1.0) {
      y += shelf_h;
      x = 0.0;
      shelf_h = 0.0;
    }
    if (y + ch > 1.0) return false;
    if (slots) (*slots)[i] = {x, y};
    x += cw;
    shelf_h = std::max(shelf_h, ch);
  }
  return true;
}

}  // namespace

int UvAtlas::num_faces() const {
  int n = 0;
  for (const auto& p : islands) n += p.island.chart->num_faces();
  return n;
}

UvChart orient_island(const UvChart& uv) {
  if (!uv.chart) throw_input("orient_island: uv has no chart");
  const auto& pts = uv.uv;
  const std::vector<int> hull = convex_hull(pts);
  if (hull.size() < 2) throw_input("orient_island: island needs at least two distinct points");

  double best_angle = 0.0;
  if (hull.size() >= 3) {
    double best_area = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < hull.size(); ++i) {
      const Vec2 e = pts[hull[(i + 1) % hull.size()]] - pts[hull[i]];
      const double angle = -std::atan2(e.y(), e.x());
      const double c = std::cos(angle);
      const double s = std::sin(angle);
      double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
      for (int k : hull) {
        const double x = c * pts[k].x() - s * pts[k].y();
        const double y = s * pts[k].x() + c * pts[k].y();
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
      }
      const double area = (xmax - xmin) * (ymax - ymin);
      if (area < best_area * (1.0 - 1e-12)) {
        best_area = area;
        best_angle = angle;
      }
    }
  } else {
    // Collinear: align the principal axis with x.
    Vec2 mean = Vec2::Zero();
    for (const Vec2& p : pts) mean += p;
    mean /= static_cast<double>(pts.size());
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (const Vec2& p : pts) cov += (p - mean) * (p - mean).transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
    const Vec2 axis = es.eigenvectors().col(1);
    best_angle = -std::atan2(axis.y(), axis.x());
  }
  std::vector<Vec2> out = rotate_all(pts, best_angle);
  translate_to_origin(out);
  UvChart r = make_uv_chart(uv.chart, std::move(out));
  return r;
}

UvAtlas pack(std::span<const UvChart> islands, double margin) {
  if (islands.empty()) throw_input("pack: no islands");
  if (!(margin >= 0.0) || margin >= 1.0) throw_input("pack: margin must be in [0, 1)");
  const int n = static_cast<int>(islands.size());

  // Per-island scale so uv area equals 3D area.
  std::vector<double> own_scale(n);
  std::vector<Item> items(n);
  for (int i = 0; i < n; ++i) {
    const UvChart& isl = islands[i];
    if (!isl.chart) throw_input("pack: island " + std::to_string(i) + " has no chart");
    const double a2 = uv_area(*isl.chart, isl.uv);
    const double a3 = isl.chart->surface_area();
    if (!(a2 > 0.0) || !(a3 > 0.0)) throw_input("pack: island " + std::to_string(i) + " has zero area");
    own_scale[i] = std::sqrt(a3 / a2);
    const Aabb2 box = bounding_box(isl.uv);
    Item it;
    it.index = i;
    it.w = box.width() * own_scale[i];
    it.h = box.height() * own_scale[i];
    if (it.h > it.w) {
      std::swap(it.w, it.h);
      it.rotated = true;
    }
    items[i] = it;
  }
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.h > b.h; });

  double total = 0.0;
  double widest = 0.0;
  for (const Item& it : items) {
    total += it.w * it.h;
    widest = std::max(widest, std::max(it.w, it.h));
  }
  if (!shelf_layout(items, 0.0, margin, nullptr)) throw_input("pack: margin leaves no room for the islands");
  double lo = 0.0;
  double hi = std::min(total > 0.0 ? 1.0 / std::sqrt(total) : 1.0, widest > 0.0 ? 1.0 / widest : 1.0);
  if (shelf_layout(items, hi, margin, nullptr)) {
    lo = hi;
  } else {
    for (int iter = 0; iter < 32; ++iter) {
      const double mid = 0.5 * (lo + hi);
      if (shelf_layout(items, mid, margin, nullptr)) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
  }
  std::vector<Slot> slots;
  if (!shelf_layout(items, lo, margin, &slots)) throw_invariant("pack: converged scale does not fit");

  UvAtlas atlas;
  atlas.margin = margin;
  atlas.global_scale = lo;
  atlas.islands.resize(n);
  for (std::size_t k = 0; k < items.size(); ++k) {
    const Item& it = items[k];
    const UvChart& isl = islands[it.index];
    PlacedIsland& p = atlas.islands[it.index];
    p.island = isl;
    p.rotated = it.rotated;
    p.scale = own_scale[it.index] * lo;
    const Aabb2 box = bounding_box(isl.uv);
    // Bounding box corner after rotation and scaling.
    const Vec2 origin(slots[k].x + 0.5 * margin, slots[k].y + 0.5 * margin);
    p.uv.reserve(isl.uv.size());
    for (const Vec2& q : isl.uv) {
      const Vec2 local = q - box.min;
      const Vec2 r = it.rotated ? Vec2(box.height() - local.y(), local.x()) : local;
      p.uv.push_back(origin + p.scale * r);
    }
    // Express the placement as offset + scale · R · q.
    const Vec2 r_min = it.rotated ? Vec2(-box.min.y(), box.min.x()) : box.min;
    const Vec2 shift = it.rotated ? Vec2(box.height(), 0.0) : Vec2::Zero();
    p.offset = origin + p.scale * (shift - r_min);
    p.cell.min = Vec2(slots[k].x, slots[k].y);
    p.cell.max = p.cell.min + Vec2(it.w * lo + margin, it.h * lo + margin);
  }
  return atlas;
}

double island_area(const UvAtlas& atlas) {
  double a = 0.0;
  for (const auto& p : atlas.islands) a += uv_area(*p.island.chart, p.uv);
  return a;
}

double utilization_margin_excluded(const UvAtlas& atlas) {
  double padding = 0.0;
  for (const auto& p : atlas.islands) padding += p.cell.area() - bounding_box(p.uv).area();
  const double avail = 1.0 - padding;
  return avail > 0.0 ? island_area(atlas) / avail : 0.0;
}

Mesh atlas_to_mesh(const Mesh& mesh, const UvAtlas& atlas) {
  Mesh out = mesh;
  out.uvs.clear();
  out.face_uvs.assign(mesh.faces.size(), Face{-1, -1, -1});
  std::vector<bool> covered(mesh.faces.size(), false);
  for (const auto& p : atlas.islands) {
    const Chart& c = *p.island.chart;
    const int base = static_cast<int>(out.uvs.size());
    out.uvs.insert(out.uvs.end(), p.uv.begin(), p.uv.end());
    for (int f = 0; f < c.num_faces(); ++f) {
      const int mf = c.source_face[f];
      if (mf < 0 || mf >= mesh.num_faces()) throw_input("atlas: island face provenance out of range");
      if (covered[mf]) throw_input("atlas: mesh face " + std::to_string(mf) + " covered twice");
      covered[mf] = true;
      // Chart faces keep the mesh corner order.
      out.face_uvs[mf] = {base + c.faces[f][0], base + c.faces[f][1], base + c.faces[f][2]};
    }
  }
  std::string missing;
  int count = 0;
  for (std::size_t f = 0; f < covered.size(); ++f) {
    if (!covered[f]) {
      if (count < 10) missing += (count ? ", " : "") + std::to_string(f);
      ++count;
    }
  }
  if (count > 0) {
    throw_input("atlas does not cover " + std::to_string(count) + " mesh face(s): " + missing +
                (count > 10 ? ", ..." : ""));
  }
  return out;
}

}  // namespace uvkit
