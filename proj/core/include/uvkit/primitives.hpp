#pragma once

#include "uvkit/mesh.hpp"
#include "uvkit/seams.hpp"

namespace uvkit::primitives {

// Closed shapes are oriented outward.

/// Unit cube [0,1]³, vertex id = x + 2y + 4z. Each square face is split
/// along the diagonal that avoids corners 0 and 7, so the only shortest
/// edge paths between those corners run along three cube edges.
[[nodiscard]] Mesh cube();

/// Spanning tree of seven cube edges that unfolds the cube into a Latin cross.
[[nodiscard]] SeamSet cube_cross_seams();

/// Vertices ±x, ±y, ±z in that order.
[[nodiscard]] Mesh octahedron();
[[nodiscard]] SeamSet octahedron_tree_seams();

/// Regular icosahedron with unit circumradius.
[[nodiscard]] Mesh icosahedron();

/// Latitude/longitude sphere with a vertex at each pole.
[[nodiscard]] Mesh uv_sphere(int slices, int stacks, double radius = 1.0);

/// Upper half of `uv_sphere`, open along the equator.
[[nodiscard]] Mesh hemisphere(int slices, int stacks, double radius = 1.0);

/// Open cylinder of `around` × `along` quads around the z axis.
/// Vertex id = ring * around + i for ring in [0, along].
[[nodiscard]] Mesh open_cylinder(int around, int along, double radius = 1.0, double height = 2.0);

/// Edges of the generatrix at angle 0, from bottom to top boundary.
[[nodiscard]] SeamSet cylinder_generatrix_seams(int around, int along);

/// Planar nx × ny vertex grid spanning [0, sx] × [0, sy] at z = 0.
/// Vertex id = j * nx + i; normals point to +z.
[[nodiscard]] Mesh grid(int nx, int ny, double sx = 1.0, double sy = 1.0);

/// Regular hexagon fan: centre vertex 0 and six rim vertices.
[[nodiscard]] Mesh hexagon_fan(double radius = 1.0);

/// Two triangles forming the unit square, sharing the diagonal (0, 2).
[[nodiscard]] Mesh two_triangle_square();

}  // namespace uvkit::primitives
