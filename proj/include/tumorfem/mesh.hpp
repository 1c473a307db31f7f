#ifndef TUMORFEM_MESH_HPP
#define TUMORFEM_MESH_HPP

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "tumorfem/errors.hpp"

namespace tumorfem {

using Point = std::array<double, 2>; // [x, y]; y unused in 1D

struct BoundaryFacet {
  std::array<int, 2> nodes;  // 1D: {node, -1}; 2D: edge endpoints
  std::array<double, 2> normal; // outward unit normal
  int element; // owning element index
};

/// Conforming simplicial mesh of an interval or an axis-aligned rectangle.
/// 2D cells are split into two right triangles so every angle is <= 90 degrees,
/// which keeps the P1 stiffness matrix an M-matrix (nonpositive off-diagonals).
struct Mesh {
  int dim = 1;
  std::vector<Point> nodes;
  std::vector<std::array<int, 3>> elements; // 1D segments use slots {a, b, -1}
  std::vector<BoundaryFacet> boundary_facets;
  std::vector<bool> node_boundary_flags;
  std::vector<int> interior_index; // node -> dense interior numbering, -1 on boundary
  int n_interior = 0;

  int n_nodes() const { return static_cast<int>(nodes.size()); }
  int n_elements() const { return static_cast<int>(elements.size()); }
  int nodes_per_element() const { return dim + 1; }

  double element_measure(int e) const {
    const auto& el = elements[e];
    if (dim == 1) return nodes[el[1]][0] - nodes[el[0]][0];
    const Point& a = nodes[el[0]];
    const Point& b = nodes[el[1]];
    const Point& c = nodes[el[2]];
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
  }

  double domain_measure() const {
    double s = 0.0;
    for (int e = 0; e < n_elements(); ++e) s += element_measure(e);
    return s;
  }

  /// Bounding box (lo, hi); equals the generating domain for built meshes.
  std::pair<Point, Point> bounding_box() const {
    Point lo = nodes.front(), hi = nodes.front();
    for (const auto& p : nodes) {
      lo[0] = std::min(lo[0], p[0]);
      lo[1] = std::min(lo[1], p[1]);
      hi[0] = std::max(hi[0], p[0]);
      hi[1] = std::max(hi[1], p[1]);
    }
    return {lo, hi};
  }
};

namespace detail {

inline void finalize_boundary(Mesh& mesh) {
  mesh.node_boundary_flags.assign(mesh.nodes.size(), false);
  for (const auto& f : mesh.boundary_facets) {
    mesh.node_boundary_flags[f.nodes[0]] = true;
    if (f.nodes[1] >= 0) mesh.node_boundary_flags[f.nodes[1]] = true;
  }
  mesh.interior_index.assign(mesh.nodes.size(), -1);
  mesh.n_interior = 0;
  for (int i = 0; i < mesh.n_nodes(); ++i)
    if (!mesh.node_boundary_flags[i]) mesh.interior_index[i] = mesh.n_interior++;
}

inline void check_element_quality(const Mesh& mesh) {
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const double measure = mesh.element_measure(e);
    if (!(measure > 0.0)) fail(errc::invalid_domain, "element " + std::to_string(e) + " has nonpositive measure");
    if (mesh.dim == 2) {
      const auto& el = mesh.elements[e];
      for (int v = 0; v < 3; ++v) {
        const Point& a = mesh.nodes[el[v]];
        const Point& b = mesh.nodes[el[(v + 1) % 3]];
        const Point& c = mesh.nodes[el[(v + 2) % 3]];
        const double dot = (b[0] - a[0]) * (c[0] - a[0]) + (b[1] - a[1]) * (c[1] - a[1]);
        if (dot < -1e-12) fail(errc::invalid_domain, "obtuse triangle " + std::to_string(e));
      }
    }
  }
}

} // namespace detail

/// Uniform mesh of the interval (a, b) with `resolution` nodes.
inline Mesh build_interval_mesh(double a, double b, int resolution) {
  if (resolution < 2) fail(errc::invalid_resolution, "need at least 2 nodes, got " + std::to_string(resolution));
  if (!(b > a)) fail(errc::invalid_domain, "interval requires b > a");
  Mesh mesh;
  mesh.dim = 1;
  mesh.nodes.resize(resolution);
  const double h = (b - a) / (resolution - 1);
  for (int i = 0; i < resolution; ++i) mesh.nodes[i] = {a + h * i, 0.0};
  for (int i = 0; i + 1 < resolution; ++i) mesh.elements.push_back({i, i + 1, -1});
  mesh.boundary_facets.push_back({{0, -1}, {-1.0, 0.0}, 0});
  mesh.boundary_facets.push_back({{resolution - 1, -1}, {1.0, 0.0}, resolution - 2});
  detail::finalize_boundary(mesh);
  detail::check_element_quality(mesh);
  return mesh;
}

/// Structured triangulation of (ax,bx) x (ay,by), `resolution` nodes per axis.
/// Each cell is split along its lower-left / upper-right diagonal.
inline Mesh build_rectangle_mesh(double ax, double bx, double ay, double by, int resolution) {
  if (resolution < 2) fail(errc::invalid_resolution, "need at least 2 nodes per axis, got " + std::to_string(resolution));
  if (!(bx > ax) || !(by > ay)) fail(errc::invalid_domain, "rectangle requires bx > ax and by > ay");
  Mesh mesh;
  mesh.dim = 2;
  const int n = resolution;
  const double hx = (bx - ax) / (n - 1);
  const double hy = (by - ay) / (n - 1);
  mesh.nodes.resize(static_cast<std::size_t>(n) * n);
  auto id = [n](int i, int j) { return j * n + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) mesh.nodes[id(i, j)] = {ax + hx * i, ay + hy * j};

  for (int j = 0; j + 1 < n; ++j) {
    for (int i = 0; i + 1 < n; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      mesh.elements.push_back({a, b, c}); // lower-right triangle
      mesh.elements.push_back({a, c, d}); // upper-left triangle
    }
  }

  // Each boundary edge is an edge of exactly one triangle of the adjacent cell.
  auto lower_tri = [n](int i, int j) { return 2 * (j * (n - 1) + i); };
  for (int i = 0; i + 1 < n; ++i) {
    mesh.boundary_facets.push_back({{id(i, 0), id(i + 1, 0)}, {0.0, -1.0}, lower_tri(i, 0)});
    mesh.boundary_facets.push_back({{id(i, n - 1), id(i + 1, n - 1)}, {0.0, 1.0}, lower_tri(i, n - 2) + 1});
  }
  for (int j = 0; j + 1 < n; ++j) {
    mesh.boundary_facets.push_back({{id(0, j), id(0, j + 1)}, {-1.0, 0.0}, lower_tri(0, j) + 1});
    mesh.boundary_facets.push_back({{id(n - 1, j), id(n - 1, j + 1)}, {1.0, 0.0}, lower_tri(n - 2, j)});
  }
  detail::finalize_boundary(mesh);
  detail::check_element_quality(mesh);
  return mesh;
}

struct DomainSpec {
  int dim = 1;
  double ax = 0.0, bx = 1.0, ay = 0.0, by = 1.0;
};

inline Mesh build_mesh(const DomainSpec& spec, int resolution) {
  if (spec.dim == 1) return build_interval_mesh(spec.ax, spec.bx, resolution);
  if (spec.dim == 2) return build_rectangle_mesh(spec.ax, spec.bx, spec.ay, spec.by, resolution);
  fail(errc::invalid_domain, "dimension must be 1 or 2");
}

inline double facet_measure(const Mesh& mesh, const BoundaryFacet& f) {
  if (mesh.dim == 1) return 1.0; // surface measure on a point boundary is counting measure
  const Point& a = mesh.nodes[f.nodes[0]];
  const Point& b = mesh.nodes[f.nodes[1]];
  return std::hypot(b[0] - a[0], b[1] - a[1]);
}

} // namespace tumorfem

#endif
