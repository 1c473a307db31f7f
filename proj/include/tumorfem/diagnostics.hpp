#ifndef TUMORFEM_DIAGNOSTICS_HPP
#define TUMORFEM_DIAGNOSTICS_HPP

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tumorfem/assembly.hpp"
#include "tumorfem/stepper.hpp"

namespace tumorfem {

/// Discrete trajectory norms: sup-in-time L2, accumulated H1, and the
/// accumulated H1 norm of the discrete velocity.
struct NormReport {
  double linf_H = 0.0;
  double l2_V = 0.0;
  double h1_V0 = 0.0;
};

namespace detail {

/// sqrt(v^T Op v) applied per displacement component when the field is vector-valued.
inline double weighted_norm(const Field& f, const SparseMatrix& m, const SparseMatrix* k) {
  const Mesh& mesh = *f.mesh;
  const int comps = f.components();
  double s = 0.0;
  std::vector<double> vc(mesh.n_nodes());
  for (int c = 0; c < comps; ++c) {
    for (int i = 0; i < mesh.n_nodes(); ++i) vc[i] = f.values[static_cast<std::size_t>(i) * comps + c];
    const std::vector<double> mv = matvec(m, vc);
    for (int i = 0; i < mesh.n_nodes(); ++i) s += vc[i] * mv[i];
    if (k) {
      const std::vector<double> kv = matvec(*k, vc);
      for (int i = 0; i < mesh.n_nodes(); ++i) s += vc[i] * kv[i];
    }
  }
  return std::sqrt(std::max(s, 0.0));
}

inline Field field_difference(const Field& a, const Field& b) {
  if (a.mesh != b.mesh || a.values.size() != b.values.size())
    fail(errc::shape_error, "field difference: mismatched fields");
  Field d = a;
  for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= b.values[i];
  return d;
}

} // namespace detail

/// Norms of a snapshot trajectory (state at t_0, ..., t_K). The L-infinity
/// norm is evaluated at snapshot times only; the accumulated norms treat the
/// trajectory as piecewise constant on each step interval.
inline NormReport field_norms(const std::vector<Field>& trajectory, const Mesh& mesh, double tau) {
  if (trajectory.empty()) fail(errc::shape_error, "field_norms: empty trajectory");
  for (const auto& f : trajectory)
    if (f.mesh != &mesh) fail(errc::shape_error, "field_norms: trajectory on a different mesh");
  const SparseMatrix mass = assemble_mass(mesh, false);
  const SparseMatrix stiffness = assemble_stiffness(mesh);
  NormReport report;
  double l2v_sq = 0.0, h1_sq = 0.0;
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    report.linf_H = std::max(report.linf_H, detail::weighted_norm(trajectory[k], mass, nullptr));
    if (k == 0) continue;
    const double vk = detail::weighted_norm(trajectory[k], mass, &stiffness);
    l2v_sq += tau * vk * vk;
    Field rate = detail::field_difference(trajectory[k], trajectory[k - 1]);
    for (double& v : rate.values) v /= tau;
    const double hk = detail::weighted_norm(rate, mass, &stiffness);
    h1_sq += tau * hk * hk;
  }
  report.l2_V = std::sqrt(l2v_sq);
  report.h1_V0 = std::sqrt(h1_sq);
  return report;
}

struct BoundAudit {
  double phi_overshoot = 0.0;
  double sigma_overshoot = 0.0;
  double z_overshoot = 0.0;

  double max() const { return std::max({phi_overshoot, sigma_overshoot, z_overshoot}); }
};

/// Per-field overshoot of the proven invariant region:
/// phi in [0, N], sigma in [0, max{M0, J*} e^T], z in [0, 1].
inline BoundAudit audit_bounds(const SimState& state, const ModelCoefficients& coeffs) {
  BoundAudit audit;
  const double m_sigma = sigma_bound_m(coeffs.bounds, coeffs.T);
  for (double v : state.phi.values) audit.phi_overshoot = std::max({audit.phi_overshoot, -v, v - coeffs.N});
  for (double v : state.sigma.values) audit.sigma_overshoot = std::max({audit.sigma_overshoot, -v, v - m_sigma});
  for (double v : state.z.values) audit.z_overshoot = std::max({audit.z_overshoot, -v, v - 1.0});
  return audit;
}

/// Full trajectories of one run, collected for the dependence experiment.
struct Trajectory {
  std::vector<Field> phi, sigma, u, z;
  double max_velocity_h1 = 0.0; // sup over steps of |(u^k - u^{k-1})/tau|_{H1}
};

inline Trajectory collect_trajectory(const ModelCoefficients& coeffs, const Mesh& mesh, double tau, double lambda,
                                     const StepperOptions& stepper_options = {}, int validate_samples = 1000) {
  Trajectory traj;
  SimOptions options;
  options.tau = tau;
  options.lambda = lambda;
  options.stepper = stepper_options;
  options.snapshot_stride = 1;
  options.validate_samples = validate_samples;
  SimResult result = run_simulation(coeffs, mesh, options, [&](const SimState& s) {
    traj.phi.push_back(s.phi);
    traj.sigma.push_back(s.sigma);
    traj.u.push_back(s.u);
    traj.z.push_back(s.z);
  });
  for (const auto& d : result.diagnostics) traj.max_velocity_h1 = std::max(traj.max_velocity_h1, d.velocity_h1);
  return traj;
}

struct DependenceReport {
  double lhs = 0.0;      // sum of the four solution-difference trajectory norms
  double rhs_data = 0.0; // initial-data and source-data difference norms
  double ratio = 0.0;    // lhs / rhs_data; 0 for 0/0, infinity when only rhs vanishes
  double max_velocity_h1 = 0.0;
};

/// Numerical instantiation of the continuous-dependence inequality: runs both
/// coefficient sets on the same mesh/tau/lambda and compares the size of the
/// solution difference against the size of the data difference.
inline DependenceReport continuous_dependence_experiment(const ModelCoefficients& c1, const ModelCoefficients& c2,
                                                         const Mesh& mesh, double tau, double lambda,
                                                         const StepperOptions& stepper_options = {},
                                                         int validate_samples = 1000) {
  for (const ModelCoefficients* c : {&c1, &c2}) {
    const ValidationReport report = validate_hypotheses(*c, validate_samples);
    if (!report.all_passed())
      fail(errc::hypothesis_violation,
           "continuous_dependence_experiment requires hypotheses (A) and the declared (B) constants:\n" + report.summary());
  }
  const Trajectory t1 = collect_trajectory(c1, mesh, tau, lambda, stepper_options, validate_samples);
  const Trajectory t2 = collect_trajectory(c2, mesh, tau, lambda, stepper_options, validate_samples);

  auto diff_norms = [&](const std::vector<Field>& a, const std::vector<Field>& b) {
    if (a.size() != b.size()) fail(errc::shape_error, "dependence experiment: trajectory length mismatch");
    std::vector<Field> d(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) d[k] = detail::field_difference(a[k], b[k]);
    return field_norms(d, mesh, tau);
  };

  const NormReport phi_n = diff_norms(t1.phi, t2.phi);
  const NormReport sigma_n = diff_norms(t1.sigma, t2.sigma);
  const NormReport z_n = diff_norms(t1.z, t2.z);
  const NormReport u_n = diff_norms(t1.u, t2.u);

  DependenceReport report;
  report.lhs = (phi_n.linf_H + phi_n.l2_V) + (sigma_n.linf_H + sigma_n.l2_V) + (z_n.linf_H + z_n.l2_V) +
               std::sqrt(u_n.l2_V * u_n.l2_V + u_n.h1_V0 * u_n.h1_V0);
  report.max_velocity_h1 = std::max(t1.max_velocity_h1, t2.max_velocity_h1);

  const SparseMatrix mass = assemble_mass(mesh, false);
  const SparseMatrix boundary_mass = assemble_boundary_mass(mesh);
  auto h_norm_scalar = [&](const std::function<double(Point)>& f1, const std::function<double(Point)>& f2) {
    Field d = interpolate_scalar(mesh, [&](Point x) { return f1(x) - f2(x); });
    return detail::weighted_norm(d, mass, nullptr);
  };

  double rhs = 0.0;
  rhs += h_norm_scalar(c1.phi0, c2.phi0);
  rhs += h_norm_scalar(c1.sigma0, c2.sigma0);
  rhs += h_norm_scalar(c1.z0, c2.z0);
  {
    Field du = interpolate_displacement(mesh, [&](Point x) {
      const auto a = c1.u0(x);
      const auto b = c2.u0(x);
      return std::array<double, 2>{a[0] - b[0], a[1] - b[1]};
    });
    rhs += detail::weighted_norm(du, mass, nullptr); // H-norm of u0 difference
  }

  const std::size_t k_steps = t1.phi.size() - 1;
  double f_sq = 0.0, w_sq = 0.0, g_sq = 0.0;
  for (std::size_t k = 1; k <= k_steps; ++k) {
    const double t = tau * static_cast<double>(k); // data sampled at step-end times
    Field df = interpolate_displacement(mesh, [&](Point x) {
      const auto a = c1.f(x, t);
      const auto b = c2.f(x, t);
      return std::array<double, 2>{a[0] - b[0], a[1] - b[1]};
    });
    const double fn = detail::weighted_norm(df, mass, nullptr);
    f_sq += tau * fn * fn;
    Field dw = interpolate_scalar(mesh, [&](Point x) { return c1.w(x, t) - c2.w(x, t); });
    const double wn = detail::weighted_norm(dw, mass, nullptr);
    w_sq += tau * wn * wn;
    Field dg = interpolate_scalar(mesh, [&](Point x) { return c1.sigma_gamma(x, t) - c2.sigma_gamma(x, t); });
    const double gn = detail::weighted_norm(dg, boundary_mass, nullptr);
    g_sq += tau * gn * gn;
  }
  rhs += std::sqrt(f_sq) + std::sqrt(w_sq) + std::sqrt(g_sq);
  report.rhs_data = rhs;

  if (rhs == 0.0)
    report.ratio = (report.lhs == 0.0) ? 0.0 : std::numeric_limits<double>::infinity();
  else
    report.ratio = report.lhs / rhs;
  return report;
}

} // namespace tumorfem

#endif
