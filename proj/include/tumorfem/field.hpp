#ifndef TUMORFEM_FIELD_HPP
#define TUMORFEM_FIELD_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "tumorfem/errors.hpp"
#include "tumorfem/mesh.hpp"

namespace tumorfem {

enum class FieldKind { scalar, displacement };

/// Nodal coefficient vector of a P1 finite-element function.
/// Displacement values are stored interleaved: (u_x, u_y) per node in 2D.
struct Field {
  FieldKind kind = FieldKind::scalar;
  std::vector<double> values;
  const Mesh* mesh = nullptr;

  int components() const { return kind == FieldKind::scalar ? 1 : mesh->dim; }

  double min() const {
    double m = values.empty() ? 0.0 : values[0];
    for (double v : values) m = std::min(m, v);
    return m;
  }
  double max() const {
    double m = values.empty() ? 0.0 : values[0];
    for (double v : values) m = std::max(m, v);
    return m;
  }
};

inline Field make_scalar_field(const Mesh& mesh, double fill = 0.0) {
  return Field{FieldKind::scalar, std::vector<double>(mesh.n_nodes(), fill), &mesh};
}

inline Field make_displacement_field(const Mesh& mesh, double fill = 0.0) {
  return Field{FieldKind::displacement, std::vector<double>(static_cast<std::size_t>(mesh.n_nodes()) * mesh.dim, fill),
               &mesh};
}

inline Field interpolate_scalar(const Mesh& mesh, const std::function<double(Point)>& f) {
  Field out = make_scalar_field(mesh);
  for (int i = 0; i < mesh.n_nodes(); ++i) out.values[i] = f(mesh.nodes[i]);
  return out;
}

inline Field interpolate_displacement(const Mesh& mesh, const std::function<std::array<double, 2>(Point)>& f) {
  Field out = make_displacement_field(mesh);
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    const auto v = f(mesh.nodes[i]);
    for (int c = 0; c < mesh.dim; ++c) out.values[static_cast<std::size_t>(i) * mesh.dim + c] = v[c];
  }
  return out;
}

/// Largest |u| over boundary nodes; a valid displacement field returns 0.
inline double boundary_trace_max(const Field& u) {
  if (u.kind != FieldKind::displacement) fail(errc::kind_mismatch, "boundary_trace_max expects a displacement field");
  const Mesh& mesh = *u.mesh;
  double m = 0.0;
  for (int i = 0; i < mesh.n_nodes(); ++i)
    if (mesh.node_boundary_flags[i])
      for (int c = 0; c < mesh.dim; ++c) m = std::max(m, std::abs(u.values[static_cast<std::size_t>(i) * mesh.dim + c]));
  return m;
}

inline void zero_boundary(Field& u) {
  const Mesh& mesh = *u.mesh;
  for (int i = 0; i < mesh.n_nodes(); ++i)
    if (mesh.node_boundary_flags[i])
      for (int c = 0; c < mesh.dim; ++c) u.values[static_cast<std::size_t>(i) * mesh.dim + c] = 0.0;
}

/// Gather displacement values on interior nodes into the eliminated-system ordering.
inline std::vector<double> restrict_interior(const Field& u) {
  const Mesh& mesh = *u.mesh;
  std::vector<double> out(static_cast<std::size_t>(mesh.n_interior) * mesh.dim, 0.0);
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    const int p = mesh.interior_index[i];
    if (p < 0) continue;
    for (int c = 0; c < mesh.dim; ++c)
      out[static_cast<std::size_t>(p) * mesh.dim + c] = u.values[static_cast<std::size_t>(i) * mesh.dim + c];
  }
  return out;
}

/// Scatter interior-system values back to a full field with zero boundary values.
inline Field extend_interior(const Mesh& mesh, const std::vector<double>& interior) {
  if (static_cast<int>(interior.size()) != mesh.n_interior * mesh.dim)
    fail(errc::shape_error, "extend_interior: length mismatch");
  Field out = make_displacement_field(mesh);
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    const int p = mesh.interior_index[i];
    if (p < 0) continue;
    for (int c = 0; c < mesh.dim; ++c)
      out.values[static_cast<std::size_t>(i) * mesh.dim + c] = interior[static_cast<std::size_t>(p) * mesh.dim + c];
  }
  return out;
}

} // namespace tumorfem

#endif
