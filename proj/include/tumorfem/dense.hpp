#ifndef TUMORFEM_DENSE_HPP
#define TUMORFEM_DENSE_HPP

#include <cmath>
#include <vector>

#include "tumorfem/errors.hpp"

namespace tumorfem {

/// Row-major dense matrix for the oracle path and small eigenvalue checks.
struct DenseMatrix {
  int n = 0;
  std::vector<double> a;

  explicit DenseMatrix(int size = 0) : n(size), a(static_cast<std::size_t>(size) * size, 0.0) {}

  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

/// Gaussian elimination with partial pivoting; throws oracle-failure on a
/// (numerically) singular system.
inline std::vector<double> dense_solve(DenseMatrix m, std::vector<double> rhs) {
  const int n = m.n;
  if (static_cast<int>(rhs.size()) != n) fail(errc::shape_error, "dense_solve: dimension mismatch");
  double scale = 0.0;
  for (double v : m.a) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) scale = 1.0;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int i = col + 1; i < n; ++i)
      if (std::abs(m(i, col)) > std::abs(m(pivot, col))) pivot = i;
    if (std::abs(m(pivot, col)) < 1e-14 * scale) fail(errc::oracle_failure, "dense_solve: singular system");
    if (pivot != col) {
      for (int j = 0; j < n; ++j) std::swap(m(pivot, j), m(col, j));
      std::swap(rhs[pivot], rhs[col]);
    }
    for (int i = col + 1; i < n; ++i) {
      const double factor = m(i, col) / m(col, col);
      if (factor == 0.0) continue;
      for (int j = col; j < n; ++j) m(i, j) -= factor * m(col, j);
      rhs[i] -= factor * rhs[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double s = rhs[i];
    for (int j = i + 1; j < n; ++j) s -= m(i, j) * x[j];
    x[i] = s / m(i, i);
  }
  return x;
}

/// Eigenvalues of a symmetric matrix by the cyclic Jacobi rotation method.
inline std::vector<double> symmetric_eigenvalues(DenseMatrix m) {
  const int n = m.n;
  if (n == 0) return {};
  auto off_norm = [&]() {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) s += m(i, j) * m(i, j);
    return std::sqrt(s);
  };
  double scale = 0.0;
  for (double v : m.a) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return std::vector<double>(n, 0.0);
  for (int sweep = 0; sweep < 100 && off_norm() > 1e-13 * scale * n; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(m(p, q)) <= 1e-300) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double mkp = m(k, p), mkq = m(k, q);
          m(k, p) = c * mkp - s * mkq;
          m(k, q) = s * mkp + c * mkq;
        }
        for (int k = 0; k < n; ++k) {
          const double mpk = m(p, k), mqk = m(q, k);
          m(p, k) = c * mpk - s * mqk;
          m(q, k) = s * mpk + c * mqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (int i = 0; i < n; ++i) eig[i] = m(i, i);
  return eig;
}

inline double smallest_eigenvalue(const DenseMatrix& m) {
  const auto eig = symmetric_eigenvalues(m);
  double lo = eig.empty() ? 0.0 : eig[0];
  for (double v : eig) lo = std::min(lo, v);
  return lo;
}

} // namespace tumorfem

#endif
