#pragma once

#include <array>
#include <span>
#include <vector>

#include "uvkit/mesh.hpp"

namespace uvkit {

using Tri2 = std::array<Vec2, 3>;

/// Convex hull (Andrew's monotone chain), counter-clockwise indices with
/// collinear points removed. Fewer than three entries for degenerate input.
[[nodiscard]] std::vector<int> convex_hull(std::span<const Vec2> pts);

/// True when the open interiors of the triangles intersect, by separating
/// axes. Overlap depths up to `rel_eps` times the larger triangle extent are
/// treated as touching. Zero-area triangles never overlap.
[[nodiscard]] bool triangles_overlap(const Tri2& a, const Tri2& b, double rel_eps = 1e-10);

/// Area of the intersection of two triangles (Sutherland–Hodgman clipping);
/// orientation of either input is irrelevant.
[[nodiscard]] double triangle_intersection_area(const Tri2& a, const Tri2& b);

struct Aabb2 {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();

  [[nodiscard]] double width() const { return max.x() - min.x(); }
  [[nodiscard]] double height() const { return max.y() - min.y(); }
  [[nodiscard]] double area() const { return width() * height(); }
};

[[nodiscard]] Aabb2 bounding_box(std::span<const Vec2> pts);

/// Indices of triangles whose interiors overlap another triangle in the set;
/// grid broad phase plus `triangles_overlap`.
[[nodiscard]] std::vector<bool> overlapping_triangles(std::span<const Tri2> tris);

}  // namespace uvkit
