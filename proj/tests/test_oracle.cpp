#include <catch2/catch_amalgamated.hpp>

#include "tumorfem/oracle.hpp"

using namespace tumorfem;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

} // namespace

TEST_CASE("dense replay agrees with the sparse sub-steps on random configurations") {
  std::mt19937_64 rng(20240601);
  for (int trial = 0; trial < 6; ++trial) {
    const int dim = (trial % 2) + 1;
    const Mesh mesh = dim == 1 ? build_interval_mesh(0.0, 1.0, 17) : build_rectangle_mesh(0.0, 1.0, 0.0, 1.0, 5);
    const ModelCoefficients coeffs =
        oracle::random_validated_coefficients(rng, dim, {0.0, 0.0}, {1.0, 1.0}, 1.0, 0.05);
    const SimState state = oracle::random_admissible_state(mesh, coeffs, rng);
    const Field phi_frozen = oracle::random_admissible_state(mesh, coeffs, rng).phi;
    const double tau = 0.01, t_next = 0.37;
    StepperOptions options;
    options.cg_tol = 1e-13;
    const Stepper stepper(mesh, coeffs, options);
    const oracle::ReplayArgs args{state, phi_frozen, state.sigma, state.z, state.u, tau, coeffs.lambda, t_next};

    const Field phi_sparse = stepper.step_phi(state, state.sigma, state.z, tau);
    const Field phi_dense = oracle::dense_replay_step(oracle::StepKind::phi, mesh, coeffs, args);
    CHECK(max_abs_diff(phi_sparse.values, phi_dense.values) <= 1e-10 * (1.0 + max_abs(phi_dense.values)));

    const Field sigma_sparse = stepper.step_sigma(state, phi_frozen, state.z, state.sigma, tau, t_next);
    const Field sigma_dense = oracle::dense_replay_step(oracle::StepKind::sigma, mesh, coeffs, args);
    CHECK(max_abs_diff(sigma_sparse.values, sigma_dense.values) <= 1e-10 * (1.0 + max_abs(sigma_dense.values)));

    const Field u_sparse = stepper.step_u(state, phi_frozen, state.z, tau, t_next);
    const Field u_dense = oracle::dense_replay_step(oracle::StepKind::u, mesh, coeffs, args);
    CHECK(max_abs_diff(u_sparse.values, u_dense.values) <= 1e-9 * (1.0 + max_abs(u_dense.values)));

    const Field z_sparse = stepper.step_z(state, phi_frozen, state.u, tau, coeffs.lambda, t_next);
    const Field z_dense = oracle::dense_replay_step(oracle::StepKind::z, mesh, coeffs, args);
    CHECK(max_abs_diff(z_sparse.values, z_dense.values) <= 1e-10 * (1.0 + max_abs(z_dense.values)));
  }
}

TEST_CASE("dense replay limit behaviors") {
  std::mt19937_64 rng(8);
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 9);
  ModelCoefficients coeffs = preset("decoupled_heat");
  const SimState zero = [&] {
    SimState s;
    s.phi = make_scalar_field(mesh);
    s.sigma = make_scalar_field(mesh);
    s.z = make_scalar_field(mesh);
    s.u = make_displacement_field(mesh);
    s.u_prev = s.u;
    return s;
  }();
  const oracle::ReplayArgs args{zero, zero.phi, zero.sigma, zero.z, zero.u, 0.01, coeffs.lambda, 0.01};
  // zero right-hand side -> zero solution
  for (auto kind : {oracle::StepKind::phi, oracle::StepKind::sigma, oracle::StepKind::z}) {
    const Field out = oracle::dense_replay_step(kind, mesh, coeffs, args);
    for (double v : out.values) CHECK(std::abs(v) <= 1e-14);
  }

  // identity-dominated system: vanishing tau returns (almost) the previous state
  SimState state = oracle::random_admissible_state(mesh, preset("isotropic_baseline"), rng);
  ModelCoefficients base = preset("isotropic_baseline");
  const oracle::ReplayArgs tiny{state, state.phi, state.sigma, state.z, state.u, 1e-9, base.lambda, 0.5};
  const Field out = oracle::dense_replay_step(oracle::StepKind::phi, mesh, base, tiny);
  CHECK(max_abs_diff(out.values, state.phi.values) <= 1e-6);
}

TEST_CASE("dense replay refuses large meshes") {
  const Mesh mesh = build_rectangle_mesh(0.0, 1.0, 0.0, 1.0, 17); // 289 nodes
  const ModelCoefficients coeffs = preset("isotropic_baseline");
  SimState s;
  s.phi = make_scalar_field(mesh);
  s.sigma = make_scalar_field(mesh);
  s.z = make_scalar_field(mesh);
  s.u = make_displacement_field(mesh);
  s.u_prev = s.u;
  const oracle::ReplayArgs args{s, s.phi, s.sigma, s.z, s.u, 0.01, coeffs.lambda, 0.01};
  CHECK_THROWS_MATCHES(oracle::dense_replay_step(oracle::StepKind::phi, mesh, coeffs, args), error,
                       Catch::Matchers::Predicate<error>(
                           [](const error& e) { return e.code() == errc::invalid_parameter; }));
}

TEST_CASE("heat benchmark observes second-order spatial convergence") {
  const oracle::ConvergenceTable table = oracle::heat_convergence_study(3);
  REQUIRE(table.rows.size() == 3);
  CHECK(std::isnan(table.rows[0].observed_order));
  for (std::size_t r = 1; r < table.rows.size(); ++r) {
    INFO("row " << r << ": error " << table.rows[r].error_l2 << ", order " << table.rows[r].observed_order);
    CHECK(table.rows[r].observed_order > 1.8);
    CHECK(table.rows[r].observed_order < 2.2);
  }
  CHECK(std::abs(table.rows[1].observed_order - table.rows[2].observed_order) <= 0.5);
}

TEST_CASE("constant initial data is reproduced exactly by the heat discretization") {
  PresetOptions opt;
  opt.T = 0.05;
  opt.lambda = 1.0;
  ModelCoefficients coeffs = preset("decoupled_heat", opt);
  coeffs.phi0 = [](Point) { return 0.7; };
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 16);
  SimOptions options;
  options.tau = 0.05 / 16.0;
  const SimResult result = run_simulation(coeffs, mesh, options);
  for (double v : result.final_state.phi.values) CHECK(v == Catch::Approx(0.7).margin(1e-11));
}

TEST_CASE("viscoelastic relaxation matches the exact backward-Euler decay factor") {
  // proportional tensors make every vector a generalized eigenvector with
  // ratio b/a = 1, so each step multiplies u by exactly 1/(1 + tau)
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 17);
  PresetOptions opt;
  opt.lambda = 1.0;
  ModelCoefficients coeffs = preset("decoupled_heat", opt);
  const Tensor4 unit_tensor = Tensor4::isotropic(1, 0.5, 0.0);
  coeffs.A_tensor = [unit_tensor](double, double) { return unit_tensor; };
  coeffs.B_tensor = [unit_tensor](double, double) { return unit_tensor; };
  coeffs.bounds.A_ellipticity = 1.0;
  coeffs.bounds.A_sup = coeffs.bounds.B_sup = 1.0 + 1e-12;

  SimState state;
  state.phi = make_scalar_field(mesh, 0.5);
  state.sigma = make_scalar_field(mesh);
  state.z = make_scalar_field(mesh, 0.5);
  state.u = interpolate_displacement(mesh, [](Point x) {
    return std::array<double, 2>{std::sin(M_PI * x[0]), 0.0};
  });
  state.u_prev = state.u;

  StepperOptions options;
  options.cg_tol = 1e-14;
  const Stepper stepper(mesh, coeffs, options);
  const double tau = 0.1;
  Field u = state.u;
  SimState cur = state;
  for (int k = 1; k <= 5; ++k) {
    u = stepper.step_u(cur, cur.phi, cur.z, tau, tau * k);
    cur.u = u;
  }
  const double factor = std::pow(1.0 + tau, -5.0);
  for (int i = 0; i < mesh.n_nodes(); ++i)
    CHECK(u.values[i] == Catch::Approx(factor * state.u.values[i]).margin(1e-10));
}

TEST_CASE("viscoelastic relaxation observes first-order temporal convergence") {
  const oracle::ConvergenceTable table = oracle::viscoelastic_relaxation_check(3);
  REQUIRE(table.rows.size() == 3);
  for (std::size_t r = 1; r < table.rows.size(); ++r) {
    INFO("row " << r << ": error " << table.rows[r].error_l2 << ", order " << table.rows[r].observed_order);
    CHECK(table.rows[r].observed_order > 0.8);
    CHECK(table.rows[r].observed_order < 1.2);
  }
  CHECK(std::abs(table.rows[1].observed_order - table.rows[2].observed_order) <= 0.5);
}

TEST_CASE("stationary viscous problem: no force, no elasticity, no motion") {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 9);
  ModelCoefficients coeffs = preset("decoupled_heat"); // B = 0, f = 0
  const Stepper stepper(mesh, coeffs);
  SimState state;
  state.phi = make_scalar_field(mesh, 0.5);
  state.sigma = make_scalar_field(mesh);
  state.z = make_scalar_field(mesh, 0.5);
  state.u = interpolate_displacement(mesh, [](Point x) {
    return std::array<double, 2>{x[0] * (1.0 - x[0]), 0.0};
  });
  state.u_prev = state.u;
  const Field u1 = stepper.step_u(state, state.phi, state.z, 0.05, 0.05);
  for (int i = 0; i < mesh.n_nodes(); ++i) CHECK(u1.values[i] == Catch::Approx(state.u.values[i]).margin(1e-12));
}
