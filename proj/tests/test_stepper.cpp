#include <catch2/catch_amalgamated.hpp>

#include "tumorfem/diagnostics.hpp"
#include "tumorfem/stepper.hpp"

using namespace tumorfem;

namespace {

ModelCoefficients constant_rates(double p, double g, double n_capacity) {
  PresetOptions opt;
  opt.N = n_capacity;
  ModelCoefficients c = preset("isotropic_baseline", opt);
  c.p = [p](double, double) { return p; };
  c.g = [g](double, double) { return g; };
  c.bounds.p_star = std::max(p, 1e-12);
  c.bounds.g_star = std::max(g, 1e-12);
  return c;
}

SimState uniform_state(const Mesh& mesh, double phi, double sigma, double z) {
  SimState s;
  s.phi = make_scalar_field(mesh, phi);
  s.sigma = make_scalar_field(mesh, sigma);
  s.z = make_scalar_field(mesh, z);
  s.u = make_displacement_field(mesh);
  s.u_prev = make_displacement_field(mesh);
  return s;
}

} // namespace

TEST_CASE("tumor step: explicit logistic growth on a uniform state") {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 9);
  const ModelCoefficients coeffs = constant_rates(1.0, 0.0, 2.0);
  const Stepper stepper(mesh, coeffs);
  const SimState state = uniform_state(mesh, 1.0, 0.0, 0.5);
  const Field next = stepper.step_phi(state, state.sigma, state.z, 0.1);
  for (double v : next.values) CHECK(v == Catch::Approx(1.05).epsilon(1e-10));
}

TEST_CASE("tumor step: implicit linear death on a uniform state") {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 9);
  const ModelCoefficients coeffs = constant_rates(0.0, 1.0, 2.0);
  const Stepper stepper(mesh, coeffs);
  const SimState state = uniform_state(mesh, 1.0, 0.0, 0.5);
  const Field next = stepper.step_phi(state, state.sigma, state.z, 0.1);
  for (double v : next.values) CHECK(v == Catch::Approx(1.0 / 1.1).epsilon(1e-10));
}

TEST_CASE("lactate step: uniform state with balancing Robin data") {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 9);
  PresetOptions opt;
  ModelCoefficients coeffs = preset("isotropic_baseline", opt);
  coeffs.k1 = [](double, double) { return 1.0; };
  coeffs.k2 = [](double, double) { return 1.0; };
  coeffs.J = [](double, double) { return 1.0; };
  coeffs.bounds.k1_star = 1.0;
  coeffs.bounds.k2_lower = coeffs.bounds.k2_star = 1.0;
  coeffs.bounds.J_star = 1.0;
  const double expected = 11.0 / 10.5; // (sigma/tau + J) / (1/tau + k1/(k2 + sigma))
  coeffs.sigma_gamma = [expected](Point, double) { return expected; };
  coeffs.bounds.M0 = 2.0;
  const Stepper stepper(mesh, coeffs);
  const SimState state = uniform_state(mesh, 0.5, 1.0, 0.5);
  const Field next = stepper.step_sigma(state, state.phi, state.z, state.sigma, 0.1, 0.1);
  for (double v : next.values) CHECK(v == Catch::Approx(expected).epsilon(1e-10));
}

TEST_CASE("lactate step: zero is a fixed point without sources") {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 9);
  ModelCoefficients coeffs = preset("decoupled_heat");
  const Stepper stepper(mesh, coeffs);
  const SimState state = uniform_state(mesh, 0.5, 0.0, 0.5);
  const Field next = stepper.step_sigma(state, state.phi, state.z, state.sigma, 0.1, 0.1);
  for (double v : next.values) CHECK(v == 0.0);
}

TEST_CASE("displacement step: zero data keeps zero displacement") {
  const Mesh mesh = build_rectangle_mesh(0.0, 1.0, 0.0, 1.0, 4);
  PresetOptions opt;
  opt.dim = 2;
  const ModelCoefficients coeffs = preset("isotropic_baseline", opt);
  const Stepper stepper(mesh, coeffs);
  const SimState state = uniform_state(mesh, 0.5, 0.5, 0.5);
  const Field next = stepper.step_u(state, state.phi, state.z, 0.01, 0.01);
  for (double v : next.values) CHECK(v == 0.0);
}

TEST_CASE("displacement step: pure viscosity with no force preserves displacement") {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 9);
  ModelCoefficients coeffs = preset("decoupled_heat"); // B = 0, f = 0
  const Stepper stepper(mesh, coeffs);
  SimState state = uniform_state(mesh, 0.5, 0.0, 0.5);
  state.u = interpolate_displacement(mesh, [](Point p) {
    return std::array<double, 2>{p[0] * (1.0 - p[0]), 0.0};
  });
  const Field next = stepper.step_u(state, state.phi, state.z, 0.01, 0.01);
  for (int i = 0; i < mesh.n_nodes(); ++i) CHECK(next.values[i] == Catch::Approx(state.u.values[i]).margin(1e-12));
}

TEST_CASE("damage step: interior values are untouched without sources") {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 9);
  ModelCoefficients coeffs = preset("decoupled_heat");
  const Stepper stepper(mesh, coeffs);
  const SimState state = uniform_state(mesh, 0.5, 0.0, 0.5);
  const Field next = stepper.step_z(state, state.phi, state.u, 0.1, 0.1, 0.1);
  for (double v : next.values) CHECK(v == Catch::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("damage step: explicit Yosida pullback from a synthetic overshoot") {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 9);
  ModelCoefficients coeffs = preset("decoupled_heat");
  const Stepper stepper(mesh, coeffs);
  const SimState state = uniform_state(mesh, 0.5, 0.0, 1.2);
  const Field next = stepper.step_z(state, state.phi, state.u, 0.1, 0.1, 0.1);
  for (double v : next.values) CHECK(v == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("damage step enforces the tau <= lambda contract") {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 9);
  ModelCoefficients coeffs = preset("decoupled_heat");
  const Stepper stepper(mesh, coeffs);
  const SimState state = uniform_state(mesh, 0.5, 0.0, 0.5);
  CHECK_THROWS_MATCHES(stepper.step_z(state, state.phi, state.u, 0.2, 0.1, 0.2), error,
                       Catch::Matchers::Predicate<error>(
                           [](const error& e) { return e.code() == errc::stability_violation; }));
}

TEST_CASE("picard loop on the decoupled preset converges in one iteration") {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 17);
  const ModelCoefficients coeffs = preset("decoupled_heat");
  const Stepper stepper(mesh, coeffs);
  const SimState state = stepper.initial_state();
  auto [next, diag] = stepper.gamma_picard(state, 0.01, coeffs.lambda, 0.01);
  CHECK(diag.picard_converged);
  CHECK(diag.picard_iterations == 1);
  CHECK(diag.picard_sweeps == 2);
  CHECK(diag.picard_residual == 0.0); // the map is constant in the frozen pair
}

TEST_CASE("picard loop: all-zero data is a fixed point from the start") {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 17);
  ModelCoefficients coeffs = preset("decoupled_heat");
  coeffs.phi0 = [](Point) { return 0.0; };
  coeffs.sigma0 = [](Point) { return 0.0; };
  coeffs.z0 = [](Point) { return 0.0; };
  const Stepper stepper(mesh, coeffs);
  const SimState state = stepper.initial_state();
  auto [next, diag] = stepper.gamma_picard(state, 0.01, coeffs.lambda, 0.01);
  CHECK(diag.picard_converged);
  CHECK(diag.picard_iterations == 0);
  CHECK(diag.picard_residual == 0.0);
  for (double v : next.phi.values) CHECK(v == 0.0);
  for (double v : next.sigma.values) CHECK(v == 0.0);
  for (double v : next.z.values) CHECK(v == 0.0);
}

TEST_CASE("first-sweep residual scales linearly with the step size") {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 33);
  const ModelCoefficients coeffs = preset("isotropic_baseline");
  const Stepper stepper(mesh, coeffs);
  const SimState state = stepper.initial_state();
  auto [n1, d1] = stepper.gamma_picard(state, 0.01, coeffs.lambda, 0.01);
  auto [n2, d2] = stepper.gamma_picard(state, 0.005, coeffs.lambda, 0.005);
  REQUIRE(d1.first_residual > 0.0);
  const double ratio = d2.first_residual / d1.first_residual;
  CHECK(ratio > 0.4);
  CHECK(ratio < 0.6);
}

TEST_CASE("zero-length simulation returns the initial state") {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 17);
  ModelCoefficients coeffs = preset("isotropic_baseline");
  coeffs.T = 0.0;
  SimOptions options;
  options.tau = 0.01;
  const SimResult result = run_simulation(coeffs, mesh, options);
  CHECK(result.diagnostics.empty());
  const Field expected = interpolate_scalar(mesh, coeffs.phi0);
  CHECK(result.final_state.phi.values == expected.values);
  CHECK(result.final_state.t == 0.0);
}

TEST_CASE("simulation rejects bad time grids and failed hypotheses") {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 17);
  ModelCoefficients coeffs = preset("isotropic_baseline");
  SimOptions options;
  options.tau = 0.013; // T / tau far from integral
  CHECK_THROWS_MATCHES(run_simulation(coeffs, mesh, options), error,
                       Catch::Matchers::Predicate<error>(
                           [](const error& e) { return e.code() == errc::invalid_parameter; }));

  coeffs.bounds.p_star = 0.01; // declared bound now violated by the actual p
  options.tau = 0.01;
  CHECK_THROWS_MATCHES(run_simulation(coeffs, mesh, options), error,
                       Catch::Matchers::Predicate<error>(
                           [](const error& e) { return e.code() == errc::hypothesis_violation; }));
}

TEST_CASE("a failing linear solve aborts with the partial trajectory") {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 33);
  const ModelCoefficients coeffs = preset("isotropic_baseline");
  SimOptions options;
  options.tau = 0.01;
  options.stepper.cg_max_iter = 1; // starve the solver
  const SimResult result = run_simulation(coeffs, mesh, options);
  CHECK(result.aborted);
  CHECK(result.diagnostics.empty());
  CHECK_FALSE(result.abort_reason.empty());
  CHECK(result.final_state.t == 0.0); // last completed state
}

TEST_CASE("decoupled heat run tracks the separable exact solution") {
  PresetOptions opt;
  opt.T = 0.05;
  opt.lambda = 1.0;
  const ModelCoefficients coeffs = preset("decoupled_heat", opt);
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 65);
  SimOptions options;
  options.tau = 0.05 / 256.0;
  const SimResult result = run_simulation(coeffs, mesh, options);
  const double decay = std::exp(-M_PI * M_PI * 0.05);
  double max_err = 0.0;
  for (int i = 0; i < mesh.n_nodes(); ++i) {
    const double exact = 0.5 + 0.5 * decay * std::cos(M_PI * mesh.nodes[i][0]);
    max_err = std::max(max_err, std::abs(result.final_state.phi.values[i] - exact));
  }
  CHECK(max_err < 2e-4); // O(h^2 + tau)
}

TEST_CASE("baseline run keeps every field inside its invariant region") {
  const ModelCoefficients coeffs = preset("isotropic_baseline");
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 64);
  SimOptions options;
  options.tau = 1e-2;
  const SimResult result = run_simulation(coeffs, mesh, options);
  REQUIRE(result.diagnostics.size() == 100);
  for (const auto& d : result.diagnostics) {
    CHECK(d.phi_overshoot <= 1e-9);
    CHECK(d.sigma_overshoot <= 1e-9);
    CHECK(d.picard_converged);
  }
  const BoundAudit audit = audit_bounds(result.final_state, coeffs);
  CHECK(audit.max() <= 1e-9);
}

TEST_CASE("pure Neumann run conserves the tumor mass") {
  PresetOptions opt;
  opt.T = 1.0;
  opt.lambda = 1.0;
  const ModelCoefficients coeffs = preset("decoupled_heat", opt); // p = g = 0
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 33);
  SimOptions options;
  options.tau = 1e-2;
  options.stepper.cg_tol = 1e-14;
  const SimResult result = run_simulation(coeffs, mesh, options);
  REQUIRE(result.diagnostics.size() == 100);
  const double mass0 = result.initial_scalars.mass_phi;
  for (const auto& d : result.diagnostics) CHECK(std::abs(d.mass_phi - mass0) <= 1e-10 * std::abs(mass0));
}

TEST_CASE("damage energy ledger stays below its work budget") {
  const ModelCoefficients coeffs = preset("isotropic_baseline");
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 33);
  SimOptions options;
  options.tau = 1e-2;
  const Stepper stepper(mesh, coeffs, options.stepper);
  const SimState initial = stepper.initial_state();
  double energy0 = 0.0;
  {
    const auto kz = matvec(stepper.stiffness(), initial.z.values);
    for (int i = 0; i < mesh.n_nodes(); ++i)
      energy0 += 0.5 * initial.z.values[i] * kz[i] +
                 stepper.lumped_mass()[i] * yosida_primal(initial.z.values[i], coeffs.lambda);
  }
  const SimResult result = run_simulation(coeffs, mesh, options);
  double work = 0.0, dissipation = 0.0, budget_scale = std::abs(energy0) + 1.0;
  for (const auto& d : result.diagnostics) {
    work += d.z_work_increment;
    dissipation += d.z_dissipation;
    budget_scale += std::abs(d.z_work_increment);
    CHECK(d.z_energy + dissipation <= energy0 + work + 1e-8 * budget_scale);
  }
}

TEST_CASE("discrete velocity bound is stable under mesh and step refinement") {
  PresetOptions opt;
  opt.fx = 1.0; // constant body force drives the displacement
  ModelCoefficients coeffs = preset("isotropic_baseline", opt);
  coeffs.T = 0.25;
  auto velocity_constant = [&](int nodes, double tau) {
    const Mesh mesh = build_interval_mesh(0.0, 1.0, nodes);
    SimOptions options;
    options.tau = tau;
    const SimResult result = run_simulation(coeffs, mesh, options);
    double vmax = 0.0;
    for (const auto& d : result.diagnostics) vmax = std::max(vmax, d.velocity_h1);
    return vmax; // data norm |f| = 1, u0 = 0
  };
  const double base = velocity_constant(33, 0.01);
  const double half_tau = velocity_constant(33, 0.005);
  const double half_h = velocity_constant(65, 0.01);
  CHECK(half_tau <= 2.0 * base);
  CHECK(half_tau >= 0.5 * base);
  CHECK(half_h <= 2.0 * base);
  CHECK(half_h >= 0.5 * base);
}
