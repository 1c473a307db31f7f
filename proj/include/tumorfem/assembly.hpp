#ifndef TUMORFEM_ASSEMBLY_HPP
#define TUMORFEM_ASSEMBLY_HPP

#include <array>
#include <functional>
#include <vector>

#include "tumorfem/field.hpp"
#include "tumorfem/mesh.hpp"
#include "tumorfem/sparse.hpp"
#include "tumorfem/tensor.hpp"

namespace tumorfem {

namespace detail {

/// Gradients of the P1 barycentric basis functions, constant per element.
inline std::array<std::array<double, 2>, 3> basis_gradients(const Mesh& mesh, int e) {
  std::array<std::array<double, 2>, 3> g{};
  const auto& el = mesh.elements[e];
  if (mesh.dim == 1) {
    const double h = mesh.nodes[el[1]][0] - mesh.nodes[el[0]][0];
    g[0] = {-1.0 / h, 0.0};
    g[1] = {1.0 / h, 0.0};
  } else {
    const Point& a = mesh.nodes[el[0]];
    const Point& b = mesh.nodes[el[1]];
    const Point& c = mesh.nodes[el[2]];
    const double det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
    g[0] = {(b[1] - c[1]) / det, (c[0] - b[0]) / det};
    g[1] = {(c[1] - a[1]) / det, (a[0] - c[0]) / det};
    g[2] = {(a[1] - b[1]) / det, (b[0] - a[0]) / det};
  }
  return g;
}

inline Mat2 sym_outer(const std::array<double, 2>& grad, int comp, int dim) {
  Mat2 m = Mat2::zero(dim);
  for (int j = 0; j < dim; ++j) {
    m(comp, j) += 0.5 * grad[j];
    m(j, comp) += 0.5 * grad[j];
  }
  return m;
}

} // namespace detail

/// P1 mass matrix: consistent exact integration, or its row-sum lumped diagonal.
inline SparseMatrix assemble_mass(const Mesh& mesh, bool lumped) {
  SparseBuilder builder(mesh.n_nodes(), mesh.n_nodes());
  const int npe = mesh.nodes_per_element();
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const double measure = mesh.element_measure(e);
    const auto& el = mesh.elements[e];
    if (lumped) {
      for (int a = 0; a < npe; ++a) builder.add(el[a], el[a], measure / npe);
    } else {
      // 1D: (h/6)[[2,1],[1,2]];  2D: (|K|/12)[[2,1,1],[1,2,1],[1,1,2]]
      const double off = measure / (mesh.dim == 1 ? 6.0 : 12.0);
      for (int a = 0; a < npe; ++a)
        for (int b = 0; b < npe; ++b) builder.add(el[a], el[b], (a == b ? 2.0 : 1.0) * off);
    }
  }
  return builder.finalize();
}

/// P1 stiffness matrix for the Neumann-natural Laplacian.
inline SparseMatrix assemble_stiffness(const Mesh& mesh) {
  SparseBuilder builder(mesh.n_nodes(), mesh.n_nodes());
  const int npe = mesh.nodes_per_element();
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const double measure = mesh.element_measure(e);
    const auto g = detail::basis_gradients(mesh, e);
    const auto& el = mesh.elements[e];
    for (int a = 0; a < npe; ++a)
      for (int b = 0; b < npe; ++b)
        builder.add(el[a], el[b], measure * (g[a][0] * g[b][0] + g[a][1] * g[b][1]));
  }
  return builder.finalize();
}

/// Boundary mass matrix for the Robin term; rows of interior nodes are zero.
inline SparseMatrix assemble_boundary_mass(const Mesh& mesh) {
  SparseBuilder builder(mesh.n_nodes(), mesh.n_nodes());
  for (const auto& f : mesh.boundary_facets) {
    if (mesh.dim == 1) {
      builder.add(f.nodes[0], f.nodes[0], 1.0);
    } else {
      const double len = facet_measure(mesh, f);
      const int n0 = f.nodes[0], n1 = f.nodes[1];
      builder.add(n0, n0, len / 3.0);
      builder.add(n1, n1, len / 3.0);
      builder.add(n0, n1, len / 6.0);
      builder.add(n1, n0, len / 6.0);
    }
  }
  return builder.finalize();
}

/// Load vector of the boundary data term, using nodal interpolation of sigma_gamma.
/// Samples must respect 0 <= sigma_gamma <= M0.
inline Field assemble_boundary_load(const Mesh& mesh, const std::function<double(Point)>& sigma_gamma, double m0) {
  Field load = make_scalar_field(mesh);
  auto sample = [&](int node) {
    const double v = sigma_gamma(mesh.nodes[node]);
    if (v < 0.0 || v > m0)
      fail(errc::hypothesis_violation,
           "sigma_gamma sample " + std::to_string(v) + " outside [0, " + std::to_string(m0) + "]");
    return v;
  };
  for (const auto& f : mesh.boundary_facets) {
    if (mesh.dim == 1) {
      load.values[f.nodes[0]] += sample(f.nodes[0]);
    } else {
      const double len = facet_measure(mesh, f);
      const double s0 = sample(f.nodes[0]);
      const double s1 = sample(f.nodes[1]);
      load.values[f.nodes[0]] += len / 6.0 * (2.0 * s0 + s1);
      load.values[f.nodes[1]] += len / 6.0 * (s0 + 2.0 * s1);
    }
  }
  return load;
}

/// Stiffness-like operator int_Omega T eps(u) : eps(v) dx over displacement fields,
/// with rows/columns of boundary nodes eliminated (homogeneous Dirichlet).
/// `tensors` holds one tensor per element (single midpoint evaluation).
inline SparseMatrix assemble_elasticity(const Mesh& mesh, const std::vector<Tensor4>& tensors) {
  if (static_cast<int>(tensors.size()) != mesh.n_elements())
    fail(errc::shape_error, "assemble_elasticity: one tensor per element required");
  const int dim = mesh.dim;
  const int n_dof = mesh.n_interior * dim;
  SparseBuilder builder(n_dof, n_dof);
  const int npe = mesh.nodes_per_element();
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const Tensor4& t = tensors[e];
    require_admissible_tensor(t);
    const double measure = mesh.element_measure(e);
    const auto g = detail::basis_gradients(mesh, e);
    const auto& el = mesh.elements[e];
    std::array<std::array<Mat2, 2>, 3> strain{}; // strain[a][i] = eps of basis (node a, comp i)
    for (int a = 0; a < npe; ++a)
      for (int i = 0; i < dim; ++i) strain[a][i] = detail::sym_outer(g[a], i, dim);
    for (int a = 0; a < npe; ++a) {
      const int pa = mesh.interior_index[el[a]];
      if (pa < 0) continue;
      for (int b = 0; b < npe; ++b) {
        const int pb = mesh.interior_index[el[b]];
        if (pb < 0) continue;
        for (int i = 0; i < dim; ++i) {
          const Mat2 t_eps_a = t.apply(strain[a][i]);
          for (int j = 0; j < dim; ++j)
            builder.add(pa * dim + i, pb * dim + j, measure * ddot(t_eps_a, strain[b][j]));
        }
      }
    }
  }
  return builder.finalize();
}

/// Symmetrized gradient eps(u) = (grad u + grad u^T)/2, constant per element for P1.
inline std::vector<Mat2> strain_at_quadrature(const Mesh& mesh, const Field& u) {
  if (u.kind != FieldKind::displacement) fail(errc::kind_mismatch, "strain_at_quadrature expects a displacement field");
  const int dim = mesh.dim;
  std::vector<Mat2> out(mesh.n_elements(), Mat2::zero(dim));
  const int npe = mesh.nodes_per_element();
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const auto g = detail::basis_gradients(mesh, e);
    const auto& el = mesh.elements[e];
    Mat2 eps = Mat2::zero(dim);
    for (int a = 0; a < npe; ++a)
      for (int i = 0; i < dim; ++i) {
        const double ua = u.values[static_cast<std::size_t>(el[a]) * dim + i];
        for (int j = 0; j < dim; ++j) {
          eps(i, j) += 0.5 * ua * g[a][j];
          eps(j, i) += 0.5 * ua * g[a][j];
        }
      }
    out[e] = eps;
  }
  return out;
}

/// Volume-weighted transfer of element-constant strains to nodes.
inline std::vector<Mat2> strain_to_nodes(const Mesh& mesh, const std::vector<Mat2>& element_strain) {
  std::vector<Mat2> nodal(mesh.n_nodes(), Mat2::zero(mesh.dim));
  std::vector<double> weight(mesh.n_nodes(), 0.0);
  const int npe = mesh.nodes_per_element();
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const double measure = mesh.element_measure(e);
    for (int a = 0; a < npe; ++a) {
      const int n = mesh.elements[e][a];
      for (int i = 0; i < mesh.dim * mesh.dim; ++i) nodal[n].a[i] += measure * element_strain[e].a[i];
      weight[n] += measure;
    }
  }
  for (int n = 0; n < mesh.n_nodes(); ++n)
    if (weight[n] > 0.0)
      for (int i = 0; i < mesh.dim * mesh.dim; ++i) nodal[n].a[i] /= weight[n];
  return nodal;
}

/// Body-force load on interior displacement dofs via lumped nodal quadrature.
inline std::vector<double> assemble_body_load(const Mesh& mesh,
                                              const std::function<std::array<double, 2>(Point)>& f) {
  const int dim = mesh.dim;
  std::vector<double> lumped(mesh.n_nodes(), 0.0);
  const int npe = mesh.nodes_per_element();
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const double w = mesh.element_measure(e) / npe;
    for (int a = 0; a < npe; ++a) lumped[mesh.elements[e][a]] += w;
  }
  std::vector<double> load(static_cast<std::size_t>(mesh.n_interior) * dim, 0.0);
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    const int p = mesh.interior_index[i];
    if (p < 0) continue;
    const auto v = f(mesh.nodes[i]);
    for (int c = 0; c < dim; ++c) load[static_cast<std::size_t>(p) * dim + c] = lumped[i] * v[c];
  }
  return load;
}

} // namespace tumorfem

#endif
