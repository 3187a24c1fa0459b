#include "uvkit/primitives.hpp"

#include <cmath>
#include <numbers>

namespace uvkit::primitives {

namespace {

// Flips faces whose normal points towards `center` (closed convex shapes).
void orient_outward(Mesh& mesh, const Vec3& center) {
  for (Face& t : mesh.faces) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    const Vec3 n = (b - a).cross(c - a);
    if (n.dot((a + b + c) / 3.0 - center) < 0.0) std::swap(t[1], t[2]);
  }
}

}  // namespace

Mesh cube() {
  Mesh mesh;
  for (int v = 0; v < 8; ++v) {
    mesh.vertices.emplace_back(v & 1, (v >> 1) & 1, (v >> 2) & 1);
  }
  const int quads[6][4] = {
      {0, 2, 6, 4}, {1, 3, 7, 5}, {0, 1, 5, 4}, {2, 3, 7, 6}, {0, 1, 3, 2}, {4, 5, 7, 6},
  };
  for (const auto& q : quads) {
    const bool corner_on_ac = q[0] == 0 || q[0] == 7 || q[2] == 0 || q[2] == 7;
    if (corner_on_ac) {
      mesh.faces.push_back({q[0], q[1], q[3]});
      mesh.faces.push_back({q[1], q[2], q[3]});
    } else {
      mesh.faces.push_back({q[0], q[1], q[2]});
      mesh.faces.push_back({q[0], q[2], q[3]});
    }
  }
  orient_outward(mesh, Vec3(0.5, 0.5, 0.5));
  return mesh;
}

SeamSet cube_cross_seams() {
  return SeamSet({{0, 1}, {0, 2}, {2, 6}, {4, 6}, {1, 3}, {3, 7}, {5, 7}}, "cube");
}

Mesh octahedron() {
  Mesh mesh;
  mesh.vertices = {Vec3(1, 0, 0), Vec3(-1, 0, 0), Vec3(0, 1, 0),
                   Vec3(0, -1, 0), Vec3(0, 0, 1), Vec3(0, 0, -1)};
  for (int pole : {4, 5}) {
    const int ring[4] = {0, 2, 1, 3};
    for (int k = 0; k < 4; ++k) mesh.faces.push_back({pole, ring[k], ring[(k + 1) % 4]});
  }
  orient_outward(mesh, Vec3::Zero());
  return mesh;
}

SeamSet octahedron_tree_seams() {
  return SeamSet({{4, 0}, {4, 1}, {4, 2}, {4, 3}, {0, 5}}, "octahedron");
}

Mesh icosahedron() {
  const double phi = std::numbers::phi;
  Mesh mesh;
  mesh.vertices = {Vec3(-1, phi, 0), Vec3(1, phi, 0),  Vec3(-1, -phi, 0), Vec3(1, -phi, 0),
                   Vec3(0, -1, phi), Vec3(0, 1, phi),  Vec3(0, -1, -phi), Vec3(0, 1, -phi),
                   Vec3(phi, 0, -1), Vec3(phi, 0, 1),  Vec3(-phi, 0, -1), Vec3(-phi, 0, 1)};
  for (Vec3& v : mesh.vertices) v.normalize();
  mesh.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  orient_outward(mesh, Vec3::Zero());
  return mesh;
}

namespace {

// Rings from the north pole down to polar angle `max_theta`; the south pole
// is added only for a full sphere.
Mesh latitude_mesh(int slices, int stacks, double radius, bool full) {
  Mesh mesh;
  mesh.vertices.emplace_back(0, 0, radius);
  for (int s = 1; s <= stacks; ++s) {
    if (full && s == stacks) break;
    const double theta = (full ? std::numbers::pi : std::numbers::pi / 2.0) * s / stacks;
    for (int i = 0; i < slices; ++i) {
      const double phi = 2.0 * std::numbers::pi * i / slices;
      mesh.vertices.emplace_back(radius * std::sin(theta) * std::cos(phi),
                                 radius * std::sin(theta) * std::sin(phi), radius * std::cos(theta));
    }
  }
  const int rings = full ? stacks - 1 : stacks;
  auto ring_vertex = [&](int r, int i) { return 1 + r * slices + (i % slices); };
  for (int i = 0; i < slices; ++i) mesh.faces.push_back({0, ring_vertex(0, i), ring_vertex(0, i + 1)});
  for (int r = 0; r + 1 < rings; ++r) {
    for (int i = 0; i < slices; ++i) {
      const int a = ring_vertex(r, i);
      const int b = ring_vertex(r, i + 1);
      const int c = ring_vertex(r + 1, i + 1);
      const int d = ring_vertex(r + 1, i);
      mesh.faces.push_back({a, d, c});
      mesh.faces.push_back({a, c, b});
    }
  }
  if (full) {
    const int south = mesh.num_vertices();
    mesh.vertices.emplace_back(0, 0, -radius);
    for (int i = 0; i < slices; ++i) {
      mesh.faces.push_back({south, ring_vertex(rings - 1, i + 1), ring_vertex(rings - 1, i)});
    }
  }
  orient_outward(mesh, Vec3::Zero());
  return mesh;
}

}  // namespace

Mesh uv_sphere(int slices, int stacks, double radius) {
  return latitude_mesh(slices, stacks, radius, true);
}

Mesh hemisphere(int slices, int stacks, double radius) {
  return latitude_mesh(slices, stacks, radius, false);
}

Mesh open_cylinder(int around, int along, double radius, double height) {
  Mesh mesh;
  for (int r = 0; r <= along; ++r) {
    for (int i = 0; i < around; ++i) {
      const double phi = 2.0 * std::numbers::pi * i / around;
      mesh.vertices.emplace_back(radius * std::cos(phi), radius * std::sin(phi),
                                 height * r / along);
    }
  }
  auto id = [&](int r, int i) { return r * around + (i % around); };
  for (int r = 0; r < along; ++r) {
    for (int i = 0; i < around; ++i) {
      mesh.faces.push_back({id(r, i), id(r, i + 1), id(r + 1, i + 1)});
      mesh.faces.push_back({id(r, i), id(r + 1, i + 1), id(r + 1, i)});
    }
  }
  // Outward means away from the axis, not the centroid.
  for (Face& t : mesh.faces) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3 n = (mesh.vertices[t[1]] - a).cross(mesh.vertices[t[2]] - a);
    const Vec3 c = (a + mesh.vertices[t[1]] + mesh.vertices[t[2]]) / 3.0;
    if (n.dot(Vec3(c.x(), c.y(), 0.0)) < 0.0) std::swap(t[1], t[2]);
  }
  return mesh;
}

SeamSet cylinder_generatrix_seams(int around, int along) {
  std::vector<Edge> edges;
  for (int r = 0; r < along; ++r) edges.emplace_back(r * around, (r + 1) * around);
  return SeamSet(std::move(edges), "cylinder");
}

Mesh grid(int nx, int ny, double sx, double sy) {
  Mesh mesh;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      mesh.vertices.emplace_back(sx * i / (nx - 1), sy * j / (ny - 1), 0.0);
    }
  }
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      const int a = j * nx + i;
      const int b = a + 1;
      const int c = a + nx + 1;
      const int d = a + nx;
      mesh.faces.push_back({a, b, c});
      mesh.faces.push_back({a, c, d});
    }
  }
  return mesh;
}

Mesh hexagon_fan(double radius) {
  Mesh mesh;
  mesh.vertices.emplace_back(0, 0, 0);
  for (int k = 0; k < 6; ++k) {
    const double phi = std::numbers::pi / 3.0 * k;
    mesh.vertices.emplace_back(radius * std::cos(phi), radius * std::sin(phi), 0.0);
  }
  for (int k = 0; k < 6; ++k) mesh.faces.push_back({0, 1 + k, 1 + (k + 1) % 6});
  return mesh;
}

Mesh two_triangle_square() {
  Mesh mesh;
  mesh.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(1, 1, 0), Vec3(0, 1, 0)};
  mesh.faces = {{0, 1, 2}, {0, 2, 3}};
  return mesh;
}

}  // namespace uvkit::primitives
