#ifndef TUMORFEM_CG_HPP
#define TUMORFEM_CG_HPP

#include <cmath>
#include <vector>

#include "tumorfem/sparse.hpp"

namespace tumorfem {

struct SolveReport {
  int iterations = 0;
  double final_residual = 0.0; // relative 2-norm, recomputed from scratch
  bool converged = false;
};

namespace detail {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

} // namespace detail

/// Jacobi-preconditioned conjugate gradients for symmetric positive definite systems.
/// Returns x with ||b - Ax|| / ||b|| <= tol, or converged = false after max_iter.
/// The reported residual is recomputed from the final iterate, not the recurrence.
inline std::pair<std::vector<double>, SolveReport> cg_solve(const SparseMatrix& a, const std::vector<double>& b,
                                                            double tol = 1e-10, int max_iter = -1,
                                                            const std::vector<double>* initial_guess = nullptr) {
  if (a.n_rows != a.n_cols || static_cast<int>(b.size()) != a.n_rows)
    fail(errc::shape_error, "cg_solve: dimension mismatch");
  const double scale = std::max(a.max_abs(), 1.0);
  if (a.max_asymmetry() > 1e-10 * scale) fail(errc::invalid_operator, "cg_solve requires a symmetric operator");
  const int n = a.n_rows;
  if (max_iter < 0) max_iter = 10 * n;

  SolveReport report;
  const double norm_b = detail::norm2(b);
  if (norm_b == 0.0) {
    report.converged = true;
    return {std::vector<double>(n, 0.0), report};
  }

  std::vector<double> inv_diag = a.diagonal();
  for (double& d : inv_diag) d = (d != 0.0) ? 1.0 / d : 1.0;

  std::vector<double> x = initial_guess ? *initial_guess : std::vector<double>(n, 0.0);
  if (initial_guess && static_cast<int>(initial_guess->size()) != n)
    fail(errc::shape_error, "cg_solve: initial guess length mismatch");

  auto residual_of = [&](const std::vector<double>& xx) {
    std::vector<double> r = matvec(a, xx);
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
    return r;
  };

  std::vector<double> r = residual_of(x);
  std::vector<double> z(n), p(n), ap(n);
  for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
  p = z;
  double rz = detail::dot(r, z);

  while (report.iterations < max_iter) {
    if (detail::norm2(r) <= tol * norm_b) break;
    ap = matvec(a, p);
    const double pap = detail::dot(p, ap);
    if (!std::isfinite(pap) || !std::isfinite(rz)) fail(errc::numerical_breakdown, "cg_solve: non-finite inner product");
    if (pap == 0.0) break; // p in the kernel; cannot make progress
    const double alpha = rz / pap;
    for (int i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    const double rz_next = detail::dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    ++report.iterations;
  }

  // Defense against recurrence drift: verify with a fresh residual and, if it
  // disagrees with the recurrence, keep iterating on the recomputed one.
  r = residual_of(x);
  double rel = detail::norm2(r) / norm_b;
  if (rel > tol && report.iterations < max_iter) {
    for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    rz = detail::dot(r, z);
    while (report.iterations < max_iter && detail::norm2(r) > tol * norm_b) {
      ap = matvec(a, p);
      const double pap = detail::dot(p, ap);
      if (!std::isfinite(pap)) fail(errc::numerical_breakdown, "cg_solve: non-finite inner product");
      if (pap == 0.0) break;
      const double alpha = rz / pap;
      for (int i = 0; i < n; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * ap[i];
      }
      for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
      const double rz_next = detail::dot(r, z);
      const double beta = rz_next / rz;
      rz = rz_next;
      for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
      ++report.iterations;
    }
    r = residual_of(x);
    rel = detail::norm2(r) / norm_b;
  }
  for (double v : x)
    if (!std::isfinite(v)) fail(errc::numerical_breakdown, "cg_solve: non-finite solution entry");
  report.final_residual = rel;
  report.converged = rel <= tol;
  return {std::move(x), report};
}

} // namespace tumorfem

#endif
