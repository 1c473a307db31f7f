#ifndef TUMORFEM_STEPPER_HPP
#define TUMORFEM_STEPPER_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "tumorfem/assembly.hpp"
#include "tumorfem/cg.hpp"
#include "tumorfem/dense.hpp"
#include "tumorfem/field.hpp"
#include "tumorfem/model.hpp"

namespace tumorfem {

struct SimState {
  double t = 0.0;
  int step_index = 0;
  Field phi, sigma, z; // scalar fields
  Field u, u_prev;     // displacement at the current and previous time level
};

struct StepDiagnostics {
  int picard_iterations = 0; // sweeps whose combined residual exceeded tol_fp
  int picard_sweeps = 0;     // total evaluations of the coupling map
  bool picard_converged = false;
  double picard_residual = 0.0; // combined residual of the last sweep
  double first_residual = 0.0;  // combined residual of the first sweep
  std::vector<SolveReport> solver_reports;
  double phi_overshoot = 0.0; // max(-phi, phi - N, 0) over nodes
  double sigma_overshoot = 0.0;
  double z_overshoot = 0.0; // max(z - 1, -z, 0)
  double mass_phi = 0.0;
  double min_phi = 0.0, max_phi = 0.0;
  double min_sigma = 0.0, max_sigma = 0.0;
  double min_z = 0.0, max_z = 0.0;
  double u_system_min_eig = std::numeric_limits<double>::quiet_NaN(); // set when spd_audit
  double z_energy = 0.0;       // (1/2)|z|_K^2 + sum_i m_i beta_hat_lambda(z_i)
  double z_dissipation = 0.0;  // tau (1 - tau/lambda) |dz/dt|_M^2
  double z_work_increment = 0.0; // tau <dz/dt, w - Psi - pi(z^k)>_M
  double velocity_h1 = 0.0;    // |(u^k - u^{k-1}) / tau|_{H1}
};

struct StepperOptions {
  double tol_fp = 1e-8; // absolute, on the combined fixed-point residual
  int max_fp = 25;
  // Sub-step solves run well below the bound-audit gates; the 1e-9 maximum
  // principle margins budget for accumulated solver noise over a full run.
  double cg_tol = 1e-12;
  int cg_max_iter = -1;
  bool spd_audit = false; // dense eigenvalue check of every displacement system
};

/// One simulation's assembly cache and sub-step solvers. The mesh-dependent
/// operators are built once; only state-dependent pieces are reassembled.
class Stepper {
public:
  Stepper(const Mesh& mesh, const ModelCoefficients& coeffs, StepperOptions options = {})
      : mesh_(&mesh),
        coeffs_(&coeffs),
        opt_(options),
        mass_consistent_(assemble_mass(mesh, false)),
        stiffness_(assemble_stiffness(mesh)),
        boundary_mass_(assemble_boundary_mass(mesh)),
        lumped_(mesh.n_nodes(), 0.0) {
    const SparseMatrix ml = assemble_mass(mesh, true);
    for (int i = 0; i < mesh.n_nodes(); ++i) lumped_[i] = ml.at(i, i);
  }

  const Mesh& mesh() const { return *mesh_; }
  const ModelCoefficients& coeffs() const { return *coeffs_; }
  const StepperOptions& options() const { return opt_; }
  const SparseMatrix& mass_consistent() const { return mass_consistent_; }
  const SparseMatrix& stiffness() const { return stiffness_; }
  const SparseMatrix& boundary_mass() const { return boundary_mass_; }
  const std::vector<double>& lumped_mass() const { return lumped_; }

  /// Tumor phase update: implicit diffusion and death term, explicit truncated
  /// logistic source, coefficients frozen at (sigma_bar, z_bar).
  ///   (M_L/tau + K + M_L g) phi_new = M_L (phi/tau + p alpha(phi))
  Field step_phi(const SimState& state, const Field& sigma_bar, const Field& z_bar, double tau,
                 StepDiagnostics* diag = nullptr) const {
    require_positive_tau(tau);
    const int n = mesh_->n_nodes();
    std::vector<double> shift(n), rhs(n);
    for (int i = 0; i < n; ++i) {
      const double sb = sigma_bar.values[i], zb = z_bar.values[i];
      shift[i] = lumped_[i] * (1.0 / tau + coeffs_->g(sb, zb));
      rhs[i] = lumped_[i] * (state.phi.values[i] / tau + coeffs_->p(sb, zb) * alpha_eval(state.phi.values[i], coeffs_->N));
    }
    const SparseMatrix system = sparse_add_diagonal(stiffness_, shift);
    auto [x, report] = cg_solve(system, rhs, opt_.cg_tol, opt_.cg_max_iter, &state.phi.values);
    record(report, diag, "phi");
    return Field{FieldKind::scalar, std::move(x), mesh_};
  }

  /// Lactate update with Robin boundary data at t_next; the Michaelis-Menten
  /// denominator uses the frozen |sigma_bar|.
  ///   (M_L/tau + K + M_G + M_L k1/(k2 + |sigma_bar|)) sigma_new
  ///     = M_L (sigma/tau + J) + boundary_load(sigma_Gamma(t_next))
  Field step_sigma(const SimState& state, const Field& phi, const Field& z_bar, const Field& sigma_bar, double tau,
                   double t_next, StepDiagnostics* diag = nullptr) const {
    require_positive_tau(tau);
    const int n = mesh_->n_nodes();
    std::vector<double> shift(n), rhs(n);
    for (int i = 0; i < n; ++i) {
      const double ph = phi.values[i], zb = z_bar.values[i];
      const double uptake = coeffs_->k1(ph, zb) / (coeffs_->k2(ph, zb) + std::abs(sigma_bar.values[i]));
      shift[i] = lumped_[i] * (1.0 / tau + uptake);
      rhs[i] = lumped_[i] * (state.sigma.values[i] / tau + coeffs_->J(ph, zb));
    }
    const Field robin = assemble_boundary_load(
        *mesh_, [&](Point x) { return coeffs_->sigma_gamma(x, t_next); }, coeffs_->bounds.M0);
    for (int i = 0; i < n; ++i) rhs[i] += robin.values[i];
    const SparseMatrix system = sparse_add_diagonal(sparse_add(stiffness_, boundary_mass_), shift);
    auto [x, report] = cg_solve(system, rhs, opt_.cg_tol, opt_.cg_max_iter, &state.sigma.values);
    record(report, diag, "sigma");
    return Field{FieldKind::scalar, std::move(x), mesh_};
  }

  /// Quasi-static displacement update, the time-discrete viscoelastic problem:
  ///   (E_A + tau E_B) u_new = tau load(f(t_next)) + E_A u_old
  /// assembled on interior nodes with tensors evaluated at element midpoints.
  Field step_u(const SimState& state, const Field& phi, const Field& z_bar, double tau, double t_next,
               StepDiagnostics* diag = nullptr) const {
    require_positive_tau(tau);
    if (mesh_->n_interior == 0) return make_displacement_field(*mesh_);
    std::vector<Tensor4> a_tensors(mesh_->n_elements(), Tensor4::zero(mesh_->dim));
    std::vector<Tensor4> b_tensors(mesh_->n_elements(), Tensor4::zero(mesh_->dim));
    const int npe = mesh_->nodes_per_element();
    for (int e = 0; e < mesh_->n_elements(); ++e) {
      double phi_e = 0.0, z_e = 0.0;
      for (int v = 0; v < npe; ++v) {
        phi_e += phi.values[mesh_->elements[e][v]];
        z_e += z_bar.values[mesh_->elements[e][v]];
      }
      phi_e /= npe;
      z_e /= npe;
      a_tensors[e] = coeffs_->A_tensor(phi_e, z_e);
      b_tensors[e] = coeffs_->B_tensor(phi_e, z_e);
    }
    const SparseMatrix ea = assemble_elasticity(*mesh_, a_tensors);
    const SparseMatrix eb = assemble_elasticity(*mesh_, b_tensors);
    const SparseMatrix system = sparse_add(ea, eb, tau);

    std::vector<double> rhs = assemble_body_load(*mesh_, [&](Point x) { return coeffs_->f(x, t_next); });
    for (double& v : rhs) v *= tau;
    const std::vector<double> u_old = restrict_interior(state.u);
    const std::vector<double> ea_u = matvec(ea, u_old);
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += ea_u[i];

    if (opt_.spd_audit && diag) {
      DenseMatrix dense(system.n_rows);
      for (int i = 0; i < system.n_rows; ++i)
        for (int k = system.row_offsets[i]; k < system.row_offsets[i + 1]; ++k)
          dense(i, system.col_indices[k]) = system.values[k];
      const double lam = smallest_eigenvalue(dense);
      if (std::isnan(diag->u_system_min_eig) || lam < diag->u_system_min_eig) diag->u_system_min_eig = lam;
    }

    auto [x, report] = cg_solve(system, rhs, opt_.cg_tol, opt_.cg_max_iter, &u_old);
    record(report, diag, "u");
    return extend_interior(*mesh_, x);
  }

  /// Damage update: implicit diffusion, explicit Yosida term and pi, source
  /// w - Psi with nodal strains obtained by volume-weighted element averaging.
  /// Requires tau <= lambda (explicit Yosida stability contract).
  ///   (M_L/tau + K) z_new = M_L (z/tau - beta_lambda(z) - pi(z) + w(t_next) - Psi(phi, eps(u)))
  Field step_z(const SimState& state, const Field& phi, const Field& u, double tau, double lambda, double t_next,
               StepDiagnostics* diag = nullptr) const {
    require_positive_tau(tau);
    if (!(lambda > 0.0)) fail(errc::invalid_parameter, "step_z: lambda must be positive");
    if (tau > lambda * (1.0 + 1e-12))
      fail(errc::stability_violation, "step_z requires tau <= lambda (explicit Yosida term)");
    const int n = mesh_->n_nodes();
    const std::vector<Mat2> nodal_eps = strain_to_nodes(*mesh_, strain_at_quadrature(*mesh_, u));
    std::vector<double> shift(n), rhs(n);
    for (int i = 0; i < n; ++i) {
      const double zi = state.z.values[i];
      const double source = coeffs_->w(mesh_->nodes[i], t_next) - coeffs_->psi(mesh_->nodes[i], phi.values[i], nodal_eps[i]);
      shift[i] = lumped_[i] / tau;
      rhs[i] = lumped_[i] * (zi / tau - yosida_eval(zi, lambda) - coeffs_->pi(zi) + source);
    }
    const SparseMatrix system = sparse_add_diagonal(stiffness_, shift);
    auto [x, report] = cg_solve(system, rhs, opt_.cg_tol, opt_.cg_max_iter, &state.z.values);
    record(report, diag, "z");
    return Field{FieldKind::scalar, std::move(x), mesh_};
  }

  /// One time step of the coupled system: the four sub-steps composed in the
  /// order phi -> sigma -> u -> z and iterated as a Picard fixed point on the
  /// frozen pair (sigma_bar, z_bar), starting from (sigma^k, z^k).
  /// A non-converged loop is accepted and flagged, a single sweep being itself
  /// a consistent semi-implicit step.
  std::pair<SimState, StepDiagnostics> gamma_picard(const SimState& state, double tau, double lambda,
                                                    double t_next) const {
    if (!(opt_.tol_fp > 0.0)) fail(errc::invalid_parameter, "gamma_picard: tol_fp must be positive");
    StepDiagnostics diag;
    Field sigma_bar = state.sigma;
    Field z_bar = state.z;
    Field phi_new, sigma_new, u_new, z_new;
    for (int sweep = 1; sweep <= opt_.max_fp; ++sweep) {
      phi_new = step_phi(state, sigma_bar, z_bar, tau, &diag);
      sigma_new = step_sigma(state, phi_new, z_bar, sigma_bar, tau, t_next, &diag);
      u_new = step_u(state, phi_new, z_bar, tau, t_next, &diag);
      z_new = step_z(state, phi_new, u_new, tau, lambda, t_next, &diag);

      double sigma_res = 0.0; // L2 via consistent mass
      {
        std::vector<double> d(sigma_new.values);
        for (int i = 0; i < mesh_->n_nodes(); ++i) d[i] -= sigma_bar.values[i];
        const std::vector<double> md = matvec(mass_consistent_, d);
        double s = 0.0;
        for (int i = 0; i < mesh_->n_nodes(); ++i) s += d[i] * md[i];
        sigma_res = std::sqrt(std::max(s, 0.0));
      }
      double z_res = 0.0; // nodal max
      for (int i = 0; i < mesh_->n_nodes(); ++i) z_res = std::max(z_res, std::abs(z_new.values[i] - z_bar.values[i]));

      diag.picard_sweeps = sweep;
      diag.picard_residual = sigma_res + z_res;
      if (sweep == 1) diag.first_residual = diag.picard_residual;
      if (diag.picard_residual <= opt_.tol_fp) {
        diag.picard_converged = true;
        break;
      }
      ++diag.picard_iterations;
      sigma_bar = sigma_new;
      z_bar = z_new;
    }

    SimState next;
    next.t = t_next;
    next.step_index = state.step_index + 1;
    next.phi = std::move(phi_new);
    next.sigma = std::move(sigma_new);
    next.z = std::move(z_new);
    next.u_prev = state.u;
    next.u = std::move(u_new);

    finalize_diagnostics(state, next, tau, lambda, t_next, diag);
    return {std::move(next), std::move(diag)};
  }

  SimState initial_state() const {
    SimState s;
    s.phi = interpolate_scalar(*mesh_, coeffs_->phi0);
    s.sigma = interpolate_scalar(*mesh_, coeffs_->sigma0);
    s.z = interpolate_scalar(*mesh_, coeffs_->z0);
    s.u = interpolate_displacement(*mesh_, coeffs_->u0);
    if (boundary_trace_max(s.u) > 1e-12)
      fail(errc::hypothesis_violation, "u0 does not vanish on the boundary");
    zero_boundary(s.u); // displacement fields carry exact zeros on the boundary
    for (int i = 0; i < mesh_->n_nodes(); ++i) {
      const double tol = 1e-12;
      if (s.phi.values[i] < -tol || s.phi.values[i] > coeffs_->N + tol)
        fail(errc::hypothesis_violation, "phi0 outside [0, N] at node " + std::to_string(i));
      if (s.sigma.values[i] < -tol || s.sigma.values[i] > coeffs_->bounds.M0 + tol)
        fail(errc::hypothesis_violation, "sigma0 outside [0, M0] at node " + std::to_string(i));
      if (s.z.values[i] < -tol || s.z.values[i] > 1.0 + tol)
        fail(errc::hypothesis_violation, "z0 outside [0, 1] at node " + std::to_string(i));
    }
    s.u_prev = s.u;
    return s;
  }

  /// Scalar summary of a state, used for the time series output and audits.
  StepDiagnostics state_scalars(const SimState& state) const {
    StepDiagnostics d;
    fill_scalars(state, d);
    return d;
  }

private:
  void require_positive_tau(double tau) const {
    if (!(tau > 0.0)) fail(errc::invalid_parameter, "time step must be positive");
  }

  void record(const SolveReport& report, StepDiagnostics* diag, const char* which) const {
    if (diag) diag->solver_reports.push_back(report);
    if (!report.converged)
      fail(errc::step_failure, std::string("linear solve for ") + which + " did not converge (residual " +
                                   std::to_string(report.final_residual) + ")");
  }

  void fill_scalars(const SimState& s, StepDiagnostics& d) const {
    d.min_phi = s.phi.min();
    d.max_phi = s.phi.max();
    d.min_sigma = s.sigma.min();
    d.max_sigma = s.sigma.max();
    d.min_z = s.z.min();
    d.max_z = s.z.max();
    d.mass_phi = 0.0;
    for (int i = 0; i < mesh_->n_nodes(); ++i) d.mass_phi += lumped_[i] * s.phi.values[i];
    const double m_sigma = sigma_bound_m(coeffs_->bounds, coeffs_->T);
    d.phi_overshoot = std::max({0.0, -d.min_phi, d.max_phi - coeffs_->N});
    d.sigma_overshoot = std::max({0.0, -d.min_sigma, d.max_sigma - m_sigma});
    d.z_overshoot = std::max({0.0, -d.min_z, d.max_z - 1.0});
  }

  void finalize_diagnostics(const SimState& prev, const SimState& next, double tau, double lambda, double t_next,
                            StepDiagnostics& diag) const {
    fill_scalars(next, diag);

    // Damage energy ledger: E = (1/2)|z|_K^2 + sum m_i beta_hat_lambda(z_i),
    // dissipation tau (1 - tau/lambda) |dz|_M^2, work tau <dz, w - Psi - pi(z^k)>_M.
    const int n = mesh_->n_nodes();
    std::vector<double> dz(n);
    for (int i = 0; i < n; ++i) dz[i] = (next.z.values[i] - prev.z.values[i]) / tau;
    const std::vector<double> kz = matvec(stiffness_, next.z.values);
    double energy = 0.0;
    for (int i = 0; i < n; ++i) energy += 0.5 * next.z.values[i] * kz[i] + lumped_[i] * yosida_primal(next.z.values[i], lambda);
    double diss = 0.0, work = 0.0;
    const std::vector<Mat2> nodal_eps = strain_to_nodes(*mesh_, strain_at_quadrature(*mesh_, next.u));
    for (int i = 0; i < n; ++i) {
      diss += lumped_[i] * dz[i] * dz[i];
      const double source = coeffs_->w(mesh_->nodes[i], t_next) -
                            coeffs_->psi(mesh_->nodes[i], next.phi.values[i], nodal_eps[i]) -
                            coeffs_->pi(prev.z.values[i]);
      work += lumped_[i] * dz[i] * source;
    }
    diag.z_energy = energy;
    diag.z_dissipation = tau * (1.0 - tau / lambda) * diss;
    diag.z_work_increment = tau * work;

    // Discrete velocity in H1, for the uniform bound audit.
    double vel = 0.0;
    {
      std::vector<double> dv(next.u.values.size());
      for (std::size_t i = 0; i < dv.size(); ++i) dv[i] = (next.u.values[i] - prev.u.values[i]) / tau;
      const int dim = mesh_->dim;
      for (int comp = 0; comp < dim; ++comp) {
        std::vector<double> vc(n);
        for (int i = 0; i < n; ++i) vc[i] = dv[static_cast<std::size_t>(i) * dim + comp];
        const std::vector<double> mv = matvec(mass_consistent_, vc);
        const std::vector<double> kv = matvec(stiffness_, vc);
        for (int i = 0; i < n; ++i) vel += vc[i] * (mv[i] + kv[i]);
      }
    }
    diag.velocity_h1 = std::sqrt(std::max(vel, 0.0));
  }

  const Mesh* mesh_;
  const ModelCoefficients* coeffs_;
  StepperOptions opt_;
  SparseMatrix mass_consistent_;
  SparseMatrix stiffness_;
  SparseMatrix boundary_mass_;
  std::vector<double> lumped_;
};

struct SimOptions {
  double tau = 1e-2;
  double lambda = -1.0; // <= 0: use the coefficient set's lambda
  StepperOptions stepper;
  int snapshot_stride = 10;
  int validate_samples = 1000;
};

struct SimResult {
  SimState final_state;
  std::vector<StepDiagnostics> diagnostics; // one entry per completed step
  StepDiagnostics initial_scalars;          // state summary at t = 0
  bool aborted = false;                     // a step failed; trajectory is partial
  std::string abort_reason;
};

using SnapshotSink = std::function<void(const SimState&)>;

/// Runs the full discrete trajectory on [0, T] with K = T/tau uniform steps.
/// Refuses to run when the coefficient hypotheses fail or when the step size
/// violates a stability contract (tau <= lambda; tau p* <= 1, which the
/// explicit truncated logistic term needs for the discrete maximum principle).
inline SimResult run_simulation(const ModelCoefficients& coeffs, const Mesh& mesh, const SimOptions& options = {},
                                const SnapshotSink& sink = nullptr) {
  const double tau = options.tau;
  const double lambda = options.lambda > 0.0 ? options.lambda : coeffs.lambda;
  if (!(tau > 0.0)) fail(errc::invalid_parameter, "run_simulation: tau must be positive");
  if (tau > lambda * (1.0 + 1e-12)) fail(errc::stability_violation, "run_simulation requires tau <= lambda");
  if (tau * coeffs.bounds.p_star > 1.0 + 1e-12)
    fail(errc::stability_violation, "run_simulation requires tau p* <= 1");
  const double steps_real = coeffs.T / tau;
  const long k_steps = std::lround(steps_real);
  if (std::abs(steps_real - static_cast<double>(k_steps)) > 1e-9 * std::max(1.0, steps_real))
    fail(errc::invalid_parameter, "run_simulation: T / tau must be an integer");

  {
    ValidationReport report = validate_hypotheses(coeffs, options.validate_samples);
    for (const auto& c : report.checks)
      if (c.id[0] == 'A' && !c.passed)
        fail(errc::hypothesis_violation, "hypothesis " + c.id + " fails: " + c.description +
                                             " (violation " + std::to_string(c.worst_violation) + " at " + c.witness + ")");
  }

  Stepper stepper(mesh, coeffs, options.stepper);
  SimResult result;
  SimState state = stepper.initial_state();
  result.initial_scalars = stepper.state_scalars(state);
  if (sink) sink(state);

  for (long k = 1; k <= k_steps; ++k) {
    const double t_next = (k == k_steps) ? coeffs.T : tau * static_cast<double>(k);
    try {
      auto [next, diag] = stepper.gamma_picard(state, tau, lambda, t_next);
      state = std::move(next);
      result.diagnostics.push_back(std::move(diag));
    } catch (const error& e) {
      if (e.code() != errc::step_failure && e.code() != errc::numerical_breakdown) throw;
      result.aborted = true; // keep the partial trajectory
      result.abort_reason = e.what();
      break;
    }
    if (sink && (k % options.snapshot_stride == 0 || k == k_steps)) sink(state);
  }
  result.final_state = std::move(state);
  return result;
}

} // namespace tumorfem

#endif
