#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "tumorfem/assembly.hpp"
#include "tumorfem/cg.hpp"
#include "tumorfem/dense.hpp"
#include "tumorfem/mesh.hpp"

using namespace tumorfem;

namespace {

SparseMatrix diag_matrix(const std::vector<double>& d) {
  SparseBuilder b(static_cast<int>(d.size()), static_cast<int>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) b.add(static_cast<int>(i), static_cast<int>(i), d[i]);
  return b.finalize();
}

} // namespace

TEST_CASE("matvec basics") {
  const SparseMatrix eye = diag_matrix({1.0, 1.0, 1.0});
  const std::vector<double> x{3.0, -1.0, 2.5};
  CHECK(matvec(eye, x) == x);

  const Mesh mesh = build_interval_mesh(0.0, 1.0, 3);
  const SparseMatrix k = assemble_stiffness(mesh);
  const auto zero = matvec(k, {1.0, 1.0, 1.0});
  for (double v : zero) CHECK(std::abs(v) < 1e-14);
  const auto hat = matvec(k, {0.0, 1.0, 0.0});
  CHECK(hat[0] == Catch::Approx(-2.0));
  CHECK(hat[1] == Catch::Approx(4.0));
  CHECK(hat[2] == Catch::Approx(-2.0));

  CHECK_THROWS_MATCHES(matvec(k, {1.0, 2.0}), error,
                       Catch::Matchers::Predicate<error>([](const error& e) { return e.code() == errc::shape_error; }));
}

TEST_CASE("builder accumulation is visit-order independent") {
  SparseBuilder b1(2, 2), b2(2, 2);
  const std::vector<std::array<double, 1>> vals{{0.1}, {0.3}, {-0.2}, {1e-17}, {0.7}};
  for (const auto& v : vals) b1.add(0, 1, v[0]);
  for (auto it = vals.rbegin(); it != vals.rend(); ++it) b2.add(0, 1, (*it)[0]);
  b1.add(0, 0, 1.0);
  b2.add(0, 0, 1.0);
  b1.add(1, 1, 1.0);
  b2.add(1, 1, 1.0);
  const SparseMatrix m1 = b1.finalize();
  const SparseMatrix m2 = b2.finalize();
  CHECK(m1.values == m2.values);
  CHECK(m1.col_indices == m2.col_indices);
}

TEST_CASE("cg on a diagonal system") {
  const SparseMatrix a = diag_matrix({2.0, 4.0});
  auto [x, report] = cg_solve(a, {2.0, 4.0});
  CHECK(report.converged);
  CHECK(x[0] == Catch::Approx(1.0));
  CHECK(x[1] == Catch::Approx(1.0));
}

TEST_CASE("cg with zero right-hand side returns zero in zero iterations") {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 9);
  const SparseMatrix m = assemble_mass(mesh, true);
  auto [x, report] = cg_solve(m, std::vector<double>(9, 0.0));
  CHECK(report.converged);
  CHECK(report.iterations == 0);
  for (double v : x) CHECK(v == 0.0);
}

TEST_CASE("cg rejects non-symmetric operators") {
  SparseBuilder b(2, 2);
  b.add(0, 0, 1.0);
  b.add(1, 1, 1.0);
  b.add(0, 1, 0.5);
  const SparseMatrix a = b.finalize();
  CHECK_THROWS_MATCHES(cg_solve(a, {1.0, 1.0}), error,
                       Catch::Matchers::Predicate<error>([](const error& e) { return e.code() == errc::invalid_operator; }));
}

TEST_CASE("parabolic step systems match dense elimination") {
  const Mesh mesh = build_interval_mesh(0.0, 1.0, 16);
  const SparseMatrix ml = assemble_mass(mesh, true);
  const SparseMatrix k = assemble_stiffness(mesh);
  const double tau = 0.01;
  std::vector<double> shift = ml.diagonal();
  for (double& v : shift) v /= tau;
  const SparseMatrix system = sparse_add_diagonal(k, shift);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> rhs(16);
  for (double& v : rhs) v = unit(rng);

  auto [x, report] = cg_solve(system, rhs, 1e-12);
  REQUIRE(report.converged);
  CHECK(report.final_residual <= 1e-12);

  DenseMatrix dense(16);
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) dense(i, j) = system.at(i, j);
  const auto x_dense = dense_solve(dense, rhs);
  for (int i = 0; i < 16; ++i) CHECK(x[i] == Catch::Approx(x_dense[i]).margin(1e-10));
}

TEST_CASE("cg converges within n + 5 iterations on SPD systems up to n = 64") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int n : {4, 16, 33, 64}) {
    // random SPD matrix with unit diagonal dominance margin
    DenseMatrix b(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) b(i, j) = unit(rng) / n;
    SparseBuilder builder(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double v = (i == j) ? 1.0 : 0.0;
        for (int k = 0; k < n; ++k) v += b(k, i) * b(k, j);
        builder.add(i, j, v);
      }
    const SparseMatrix a = builder.finalize();
    std::vector<double> rhs(n);
    for (double& v : rhs) v = unit(rng);
    auto [x, report] = cg_solve(a, rhs, 1e-10, 10 * n);
    CHECK(report.converged);
    CHECK(report.iterations <= n + 5);
    // solution verified by residual recomputation
    const auto ax = matvec(a, x);
    double rnorm = 0.0, bnorm = 0.0;
    for (int i = 0; i < n; ++i) {
      rnorm += (rhs[i] - ax[i]) * (rhs[i] - ax[i]);
      bnorm += rhs[i] * rhs[i];
    }
    CHECK(std::sqrt(rnorm) <= 1e-10 * std::sqrt(bnorm));
  }
}
