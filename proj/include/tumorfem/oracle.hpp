#ifndef TUMORFEM_ORACLE_HPP
#define TUMORFEM_ORACLE_HPP

#include <cmath>
#include <random>
#include <vector>

#include "tumorfem/dense.hpp"
#include "tumorfem/stepper.hpp"

namespace tumorfem {
namespace oracle {

// Brute-force reference implementations. Everything here re-derives the
// element quantities from scratch (basis coefficients by solving local linear
// systems, areas by Heron's formula) so that a bug in the main assembly path
// cannot cancel against the same bug in the check.

namespace detail {

inline double element_measure(const Mesh& mesh, int e) {
  const auto& el = mesh.elements[e];
  if (mesh.dim == 1) return std::abs(mesh.nodes[el[1]][0] - mesh.nodes[el[0]][0]);
  const Point& p0 = mesh.nodes[el[0]];
  const Point& p1 = mesh.nodes[el[1]];
  const Point& p2 = mesh.nodes[el[2]];
  const double a = std::hypot(p1[0] - p0[0], p1[1] - p0[1]);
  const double b = std::hypot(p2[0] - p1[0], p2[1] - p1[1]);
  const double c = std::hypot(p0[0] - p2[0], p0[1] - p2[1]);
  const double s = 0.5 * (a + b + c);
  return std::sqrt(std::max(s * (s - a) * (s - b) * (s - c), 0.0));
}

/// Gradient of basis function `a` on element `e`, from the affine coefficients
/// of lambda_a obtained by solving the nodal interpolation conditions.
inline std::array<double, 2> basis_gradient(const Mesh& mesh, int e, int a) {
  const auto& el = mesh.elements[e];
  if (mesh.dim == 1) {
    DenseMatrix m(2);
    std::vector<double> rhs(2, 0.0);
    for (int r = 0; r < 2; ++r) {
      m(r, 0) = 1.0;
      m(r, 1) = mesh.nodes[el[r]][0];
    }
    rhs[a] = 1.0;
    const auto c = dense_solve(m, rhs);
    return {c[1], 0.0};
  }
  DenseMatrix m(3);
  std::vector<double> rhs(3, 0.0);
  for (int r = 0; r < 3; ++r) {
    m(r, 0) = 1.0;
    m(r, 1) = mesh.nodes[el[r]][0];
    m(r, 2) = mesh.nodes[el[r]][1];
  }
  rhs[a] = 1.0;
  const auto c = dense_solve(m, rhs);
  return {c[1], c[2]};
}

inline std::vector<double> lumped_mass_diagonal(const Mesh& mesh) {
  std::vector<double> d(mesh.n_nodes(), 0.0);
  const int npe = mesh.nodes_per_element();
  for (int e = 0; e < mesh.n_elements(); ++e)
    for (int v = 0; v < npe; ++v) d[mesh.elements[e][v]] += element_measure(mesh, e) / npe;
  return d;
}

inline DenseMatrix stiffness(const Mesh& mesh) {
  DenseMatrix k(mesh.n_nodes());
  const int npe = mesh.nodes_per_element();
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const double measure = element_measure(mesh, e);
    for (int a = 0; a < npe; ++a) {
      const auto ga = basis_gradient(mesh, e, a);
      for (int b = 0; b < npe; ++b) {
        const auto gb = basis_gradient(mesh, e, b);
        k(mesh.elements[e][a], mesh.elements[e][b]) += measure * (ga[0] * gb[0] + ga[1] * gb[1]);
      }
    }
  }
  return k;
}

inline DenseMatrix boundary_mass(const Mesh& mesh) {
  DenseMatrix m(mesh.n_nodes());
  for (const auto& f : mesh.boundary_facets) {
    if (mesh.dim == 1) {
      m(f.nodes[0], f.nodes[0]) += 1.0;
    } else {
      const Point& p0 = mesh.nodes[f.nodes[0]];
      const Point& p1 = mesh.nodes[f.nodes[1]];
      const double len = std::hypot(p1[0] - p0[0], p1[1] - p0[1]);
      const int i = f.nodes[0], j = f.nodes[1];
      m(i, i) += len / 3.0;
      m(j, j) += len / 3.0;
      m(i, j) += len / 6.0;
      m(j, i) += len / 6.0;
    }
  }
  return m;
}

inline std::vector<double> boundary_load(const Mesh& mesh, const std::function<double(Point)>& g) {
  std::vector<double> load(mesh.n_nodes(), 0.0);
  for (const auto& f : mesh.boundary_facets) {
    if (mesh.dim == 1) {
      load[f.nodes[0]] += g(mesh.nodes[f.nodes[0]]);
    } else {
      const Point& p0 = mesh.nodes[f.nodes[0]];
      const Point& p1 = mesh.nodes[f.nodes[1]];
      const double len = std::hypot(p1[0] - p0[0], p1[1] - p0[1]);
      const double g0 = g(p0), g1 = g(p1);
      load[f.nodes[0]] += len / 6.0 * (2.0 * g0 + g1);
      load[f.nodes[1]] += len / 6.0 * (g0 + 2.0 * g1);
    }
  }
  return load;
}

inline DenseMatrix elasticity(const Mesh& mesh, const std::vector<Tensor4>& tensors) {
  const int dim = mesh.dim;
  DenseMatrix out(mesh.n_interior * dim);
  const int npe = mesh.nodes_per_element();
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const double measure = element_measure(mesh, e);
    const Tensor4& t = tensors[e];
    for (int a = 0; a < npe; ++a) {
      const int pa = mesh.interior_index[mesh.elements[e][a]];
      if (pa < 0) continue;
      const auto ga = basis_gradient(mesh, e, a);
      for (int b = 0; b < npe; ++b) {
        const int pb = mesh.interior_index[mesh.elements[e][b]];
        if (pb < 0) continue;
        const auto gb = basis_gradient(mesh, e, b);
        for (int i = 0; i < dim; ++i)
          for (int j = 0; j < dim; ++j) {
            // eps(basis a, comp i)_{hm} = (delta_{hi} ga_m + delta_{mi} ga_h)/2
            double entry = 0.0;
            for (int h = 0; h < dim; ++h)
              for (int mm = 0; mm < dim; ++mm) {
                const double eps_a = 0.5 * ((h == i ? ga[mm] : 0.0) + (mm == i ? ga[h] : 0.0));
                for (int p = 0; p < dim; ++p)
                  for (int q = 0; q < dim; ++q) {
                    const double eps_b = 0.5 * ((p == j ? gb[q] : 0.0) + (q == j ? gb[p] : 0.0));
                    entry += t(h, mm, p, q) * eps_b * eps_a;
                  }
              }
            out(pa * dim + i, pb * dim + j) += measure * entry;
          }
      }
    }
  }
  return out;
}

inline std::vector<Mat2> nodal_strain(const Mesh& mesh, const Field& u) {
  const int dim = mesh.dim;
  std::vector<Mat2> nodal(mesh.n_nodes(), Mat2::zero(dim));
  std::vector<double> weight(mesh.n_nodes(), 0.0);
  const int npe = mesh.nodes_per_element();
  for (int e = 0; e < mesh.n_elements(); ++e) {
    const double measure = element_measure(mesh, e);
    Mat2 eps = Mat2::zero(dim);
    for (int a = 0; a < npe; ++a) {
      const auto g = basis_gradient(mesh, e, a);
      for (int i = 0; i < dim; ++i) {
        const double ua = u.values[static_cast<std::size_t>(mesh.elements[e][a]) * dim + i];
        for (int j = 0; j < dim; ++j) {
          eps(i, j) += 0.5 * ua * g[j];
          eps(j, i) += 0.5 * ua * g[j];
        }
      }
    }
    for (int a = 0; a < npe; ++a) {
      const int node = mesh.elements[e][a];
      for (int i = 0; i < dim * dim; ++i) nodal[node].a[i] += measure * eps.a[i];
      weight[node] += measure;
    }
  }
  for (int node = 0; node < mesh.n_nodes(); ++node)
    if (weight[node] > 0.0)
      for (int i = 0; i < dim * dim; ++i) nodal[node].a[i] /= weight[node];
  return nodal;
}

inline void require_small_mesh(const Mesh& mesh) {
  if (mesh.n_nodes() > 256) fail(errc::invalid_parameter, "dense replay is limited to meshes with <= 256 nodes");
}

} // namespace detail

enum class StepKind { phi, sigma, u, z };

/// All inputs a sub-step replay may need. `state` carries the previous time
/// level; `phi`, `sigma_bar`, `z_bar`, `u` are the frozen fields of the sweep.
struct ReplayArgs {
  const SimState& state;
  const Field& phi;
  const Field& sigma_bar;
  const Field& z_bar;
  const Field& u;
  double tau = 0.0;
  double lambda = 0.05;
  double t_next = 0.0;
};

inline Field dense_replay_step(StepKind kind, const Mesh& mesh, const ModelCoefficients& coeffs,
                               const ReplayArgs& args) {
  detail::require_small_mesh(mesh);
  const int n = mesh.n_nodes();
  const std::vector<double> lumped = detail::lumped_mass_diagonal(mesh);
  const double tau = args.tau;

  if (kind == StepKind::phi) {
    DenseMatrix sys = detail::stiffness(mesh);
    std::vector<double> rhs(n, 0.0);
    for (int i = 0; i < n; ++i) {
      const double sb = args.sigma_bar.values[i], zb = args.z_bar.values[i];
      sys(i, i) += lumped[i] * (1.0 / tau + coeffs.g(sb, zb));
      rhs[i] = lumped[i] * (args.state.phi.values[i] / tau +
                            coeffs.p(sb, zb) * alpha_eval(args.state.phi.values[i], coeffs.N));
    }
    return Field{FieldKind::scalar, dense_solve(sys, rhs), &mesh};
  }

  if (kind == StepKind::sigma) {
    DenseMatrix sys = detail::stiffness(mesh);
    const DenseMatrix mg = detail::boundary_mass(mesh);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) sys(i, j) += mg(i, j);
    std::vector<double> rhs =
        detail::boundary_load(mesh, [&](Point x) { return coeffs.sigma_gamma(x, args.t_next); });
    for (int i = 0; i < n; ++i) {
      const double ph = args.phi.values[i], zb = args.z_bar.values[i];
      sys(i, i) += lumped[i] * (1.0 / tau + coeffs.k1(ph, zb) / (coeffs.k2(ph, zb) + std::abs(args.sigma_bar.values[i])));
      rhs[i] += lumped[i] * (args.state.sigma.values[i] / tau + coeffs.J(ph, zb));
    }
    return Field{FieldKind::scalar, dense_solve(sys, rhs), &mesh};
  }

  if (kind == StepKind::u) {
    const int dim = mesh.dim;
    if (mesh.n_interior == 0) return make_displacement_field(mesh);
    std::vector<Tensor4> a_tensors(mesh.n_elements(), Tensor4::zero(dim));
    std::vector<Tensor4> b_tensors(mesh.n_elements(), Tensor4::zero(dim));
    const int npe = mesh.nodes_per_element();
    for (int e = 0; e < mesh.n_elements(); ++e) {
      double phi_e = 0.0, z_e = 0.0;
      for (int v = 0; v < npe; ++v) {
        phi_e += args.phi.values[mesh.elements[e][v]];
        z_e += args.z_bar.values[mesh.elements[e][v]];
      }
      a_tensors[e] = coeffs.A_tensor(phi_e / npe, z_e / npe);
      b_tensors[e] = coeffs.B_tensor(phi_e / npe, z_e / npe);
    }
    const DenseMatrix ea = detail::elasticity(mesh, a_tensors);
    const DenseMatrix eb = detail::elasticity(mesh, b_tensors);
    DenseMatrix sys(ea.n);
    for (int i = 0; i < ea.n; ++i)
      for (int j = 0; j < ea.n; ++j) sys(i, j) = ea(i, j) + tau * eb(i, j);

    std::vector<double> rhs(ea.n, 0.0);
    for (int node = 0; node < n; ++node) {
      const int p = mesh.interior_index[node];
      if (p < 0) continue;
      const auto fv = coeffs.f(mesh.nodes[node], args.t_next);
      for (int c = 0; c < dim; ++c) rhs[p * dim + c] = tau * lumped[node] * fv[c];
    }
    for (int node = 0; node < n; ++node) {
      const int p = mesh.interior_index[node];
      if (p < 0) continue;
      for (int c = 0; c < dim; ++c) {
        double s = 0.0;
        for (int node2 = 0; node2 < n; ++node2) {
          const int q = mesh.interior_index[node2];
          if (q < 0) continue;
          for (int c2 = 0; c2 < dim; ++c2)
            s += ea(p * dim + c, q * dim + c2) * args.state.u.values[static_cast<std::size_t>(node2) * dim + c2];
        }
        rhs[p * dim + c] += s;
      }
    }
    const std::vector<double> interior = dense_solve(sys, rhs);
    return extend_interior(mesh, interior);
  }

  // StepKind::z
  if (tau > args.lambda * (1.0 + 1e-12)) fail(errc::stability_violation, "dense replay of z requires tau <= lambda");
  DenseMatrix sys = detail::stiffness(mesh);
  const std::vector<Mat2> eps = detail::nodal_strain(mesh, args.u);
  std::vector<double> rhs(n, 0.0);
  for (int i = 0; i < n; ++i) {
    sys(i, i) += lumped[i] / tau;
    const double zi = args.state.z.values[i];
    rhs[i] = lumped[i] * (zi / tau - yosida_eval(zi, args.lambda) - coeffs.pi(zi) +
                          coeffs.w(mesh.nodes[i], args.t_next) -
                          coeffs.psi(mesh.nodes[i], args.phi.values[i], eps[i]));
  }
  return Field{FieldKind::scalar, dense_solve(sys, rhs), &mesh};
}

/// Hypothesis-conforming coefficient set with randomized scales, for the
/// replay equivalence suite and the invariant battery. Deterministic in `rng`.
inline ModelCoefficients random_validated_coefficients(std::mt19937_64& rng, int dim, Point box_lo, Point box_hi,
                                                       double T = 1.0, double lambda = 0.05) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PresetOptions opt;
  opt.dim = dim;
  opt.box_lo = box_lo;
  opt.box_hi = box_hi;
  opt.T = T;
  opt.lambda = lambda;
  opt.N = 0.5 + 1.5 * unit(rng);
  opt.M0 = 0.5 + 1.5 * unit(rng);
  opt.p_scale = 0.2 + 1.8 * unit(rng);
  opt.g_scale = 0.8 * unit(rng);
  opt.k1_scale = 1.5 * unit(rng);
  opt.k2_value = 0.5 + 1.5 * unit(rng);
  opt.J_scale = 0.2 + 1.3 * unit(rng);
  opt.mu_v = 0.5 + 1.5 * unit(rng);
  opt.lambda_v = unit(rng);
  opt.mu_e = 0.2 + 0.8 * unit(rng);
  opt.lambda_e = 0.5 * unit(rng);
  opt.pi_slope = 0.2 * unit(rng);
  opt.w_value = -0.5 + 1.0 * unit(rng);
  opt.sigma_gamma_value = opt.M0 * unit(rng);
  opt.psi_c_phi = 0.5 * unit(rng);
  opt.psi_c_eps = 0.5 * unit(rng);
  opt.fx = -0.5 + unit(rng);
  opt.fy = -0.5 + unit(rng);
  const bool softening = unit(rng) < 0.5;
  return preset(softening ? "damage_softening" : "isotropic_baseline", opt);
}

/// Random state inside the invariant region, with admissible displacements.
inline SimState random_admissible_state(const Mesh& mesh, const ModelCoefficients& coeffs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double m_sigma = sigma_bound_m(coeffs.bounds, coeffs.T);
  SimState s;
  s.phi = make_scalar_field(mesh);
  s.sigma = make_scalar_field(mesh);
  s.z = make_scalar_field(mesh);
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    s.phi.values[i] = coeffs.N * unit(rng);
    s.sigma.values[i] = m_sigma * unit(rng);
    s.z.values[i] = unit(rng);
  }
  s.u = make_displacement_field(mesh);
  s.u_prev = make_displacement_field(mesh);
  for (std::size_t i = 0; i < s.u.values.size(); ++i) {
    s.u.values[i] = 0.2 * (unit(rng) - 0.5);
    s.u_prev.values[i] = 0.2 * (unit(rng) - 0.5);
  }
  zero_boundary(s.u);
  zero_boundary(s.u_prev);
  return s;
}

struct ConvergenceRow {
  double h = 0.0;
  double tau = 0.0;
  double error_l2 = 0.0;
  double observed_order = std::numeric_limits<double>::quiet_NaN(); // vs previous row
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
};

namespace detail {

inline double l2_error(const Mesh& mesh, const Field& fh, const std::function<double(Point)>& exact) {
  const SparseMatrix mass = assemble_mass(mesh, false);
  std::vector<double> d(mesh.n_nodes());
  for (int i = 0; i < mesh.n_nodes(); ++i) d[i] = fh.values[i] - exact(mesh.nodes[i]);
  const std::vector<double> md = matvec(mass, d);
  double s = 0.0;
  for (int i = 0; i < mesh.n_nodes(); ++i) s += d[i] * md[i];
  return std::sqrt(std::max(s, 0.0));
}

inline void fill_orders(ConvergenceTable& table) {
  for (std::size_t r = 1; r < table.rows.size(); ++r)
    table.rows[r].observed_order = std::log2(table.rows[r - 1].error_l2 / table.rows[r].error_l2);
}

} // namespace detail

/// Heat-equation benchmark for the shared parabolic discretization: the
/// decoupled preset reduces the phi equation to the Neumann heat equation with
/// separable exact solution 1/2 + 1/2 e^{-pi^2 t} cos(pi x); tau is refined
/// with h^2 so the observed rate is the spatial one.
inline ConvergenceTable heat_convergence_study(int levels) {
  if (levels < 3) fail(errc::invalid_parameter, "heat_convergence_study needs at least 3 levels");
  ConvergenceTable table;
  const double t_final = 0.05;
  for (int level = 0; level < levels; ++level) {
    const int n = 15 * (1 << level) + 1;
    const long k_steps = 12L << (2 * level);
    const double tau = t_final / static_cast<double>(k_steps);
    PresetOptions opt;
    opt.dim = 1;
    opt.T = t_final;
    opt.lambda = 1.0;
    ModelCoefficients coeffs = preset("decoupled_heat", opt);
    const Mesh mesh = build_interval_mesh(0.0, 1.0, n);
    SimOptions sim;
    sim.tau = tau;
    sim.snapshot_stride = std::numeric_limits<int>::max();
    const SimResult result = run_simulation(coeffs, mesh, sim);
    const double decay = std::exp(-M_PI * M_PI * t_final);
    const double err = detail::l2_error(mesh, result.final_state.phi,
                                        [&](Point x) { return 0.5 + 0.5 * decay * std::cos(M_PI * x[0]); });
    table.rows.push_back({1.0 / (n - 1), tau, err, std::numeric_limits<double>::quiet_NaN()});
  }
  detail::fill_orders(table);
  return table;
}

/// Single-mode viscoelastic relaxation: with proportional tensors the exact
/// solution is e^{-(b/a) t} u0 for any u0 in V0, so the discrete error is
/// purely temporal and the observed order sits at the backward-Euler rate 1.
inline ConvergenceTable viscoelastic_relaxation_check(int levels = 3) {
  ConvergenceTable table;
  const double t_final = 1.0;
  const int n = 33;
  PresetOptions opt;
  opt.dim = 1;
  opt.T = t_final;
  opt.lambda = 1.0;
  ModelCoefficients coeffs = preset("decoupled_heat", opt);
  const Tensor4 unit_tensor = Tensor4::isotropic(1, 0.5, 0.0); // a_1111 = 1
  coeffs.A_tensor = [unit_tensor](double, double) { return unit_tensor; };
  coeffs.B_tensor = [unit_tensor](double, double) { return unit_tensor; };
  coeffs.bounds.A_ellipticity = 1.0;
  coeffs.bounds.A_sup = 1.0 + 1e-12;
  coeffs.bounds.B_sup = 1.0 + 1e-12;
  coeffs.u0 = [](Point x) { return std::array<double, 2>{std::sin(M_PI * x[0]), 0.0}; };
  const Mesh mesh = build_interval_mesh(0.0, 1.0, n);
  for (int level = 0; level < levels; ++level) {
    const long k_steps = 10L << level;
    const double tau = t_final / static_cast<double>(k_steps);
    SimOptions sim;
    sim.tau = tau;
    sim.snapshot_stride = std::numeric_limits<int>::max();
    const SimResult result = run_simulation(coeffs, mesh, sim);
    const double decay = std::exp(-t_final); // rate b/a = 1
    const SparseMatrix mass = assemble_mass(mesh, false);
    std::vector<double> d(mesh.n_nodes());
    for (int i = 0; i < mesh.n_nodes(); ++i)
      d[i] = result.final_state.u.values[i] - decay * std::sin(M_PI * mesh.nodes[i][0]);
    const std::vector<double> md = matvec(mass, d);
    double s = 0.0;
    for (int i = 0; i < mesh.n_nodes(); ++i) s += d[i] * md[i];
    table.rows.push_back({1.0 / (n - 1), tau, std::sqrt(std::max(s, 0.0)), std::numeric_limits<double>::quiet_NaN()});
  }
  detail::fill_orders(table);
  return table;
}

} // namespace oracle
} // namespace tumorfem

#endif
