#ifndef TUMORFEM_TENSOR_HPP
#define TUMORFEM_TENSOR_HPP

#include <array>
#include <cmath>

#include "tumorfem/errors.hpp"

namespace tumorfem {

/// Small dense d x d matrix (d = 1 or 2), used for strains ε(u).
struct Mat2 {
  int dim = 2;
  std::array<double, 4> a{0.0, 0.0, 0.0, 0.0}; // row-major; 1D uses a[0] only

  double& operator()(int i, int j) { return a[i * dim + j]; }
  double operator()(int i, int j) const { return a[i * dim + j]; }

  double frobenius() const {
    double s = 0.0;
    for (int i = 0; i < dim * dim; ++i) s += a[i] * a[i];
    return std::sqrt(s);
  }
  double trace() const { return dim == 1 ? a[0] : a[0] + a[3]; }

  static Mat2 zero(int dim) { return Mat2{dim, {0, 0, 0, 0}}; }
};

inline Mat2 operator-(const Mat2& x, const Mat2& y) {
  Mat2 r = x;
  for (int i = 0; i < x.dim * x.dim; ++i) r.a[i] -= y.a[i];
  return r;
}

inline double ddot(const Mat2& x, const Mat2& y) {
  double s = 0.0;
  for (int i = 0; i < x.dim * x.dim; ++i) s += x.a[i] * y.a[i];
  return s;
}

/// Fourth-order tensor a_{hijk} acting on d x d matrices, d = 1 or 2.
/// Admissible viscosity/elasticity tensors satisfy the symmetries
/// a_{hijk} = a_{ihjk} = a_{jkhi}.
struct Tensor4 {
  int dim = 2;
  std::array<double, 16> a{}; // a[((h*d+i)*d+j)*d+k]

  double& operator()(int h, int i, int j, int k) { return a[((h * dim + i) * dim + j) * dim + k]; }
  double operator()(int h, int i, int j, int k) const { return a[((h * dim + i) * dim + j) * dim + k]; }

  Mat2 apply(const Mat2& eps) const {
    Mat2 out = Mat2::zero(dim);
    for (int h = 0; h < dim; ++h)
      for (int i = 0; i < dim; ++i) {
        double s = 0.0;
        for (int j = 0; j < dim; ++j)
          for (int k = 0; k < dim; ++k) s += (*this)(h, i, j, k) * eps(j, k);
        out(h, i) = s;
      }
    return out;
  }

  double max_abs() const {
    double m = 0.0;
    const int n = dim * dim * dim * dim;
    for (int i = 0; i < n; ++i) m = std::max(m, std::abs(a[i]));
    return m;
  }

  /// max over index pairs of the symmetry defects |a_{hijk}-a_{ihjk}| and |a_{hijk}-a_{jkhi}|.
  double max_symmetry_defect() const {
    double m = 0.0;
    for (int h = 0; h < dim; ++h)
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
          for (int k = 0; k < dim; ++k) {
            m = std::max(m, std::abs((*this)(h, i, j, k) - (*this)(i, h, j, k)));
            m = std::max(m, std::abs((*this)(h, i, j, k) - (*this)(j, k, h, i)));
          }
    return m;
  }

  static Tensor4 zero(int dim) {
    Tensor4 t;
    t.dim = dim;
    t.a.fill(0.0);
    return t;
  }

  /// Identity on matrices: T eps = eps (symmetrized on symmetric inputs).
  static Tensor4 identity(int dim) { return isotropic(dim, 0.5, 0.0); }

  /// T eps = 2 mu eps + lambda tr(eps) I, written with full minor symmetry.
  static Tensor4 isotropic(int dim, double mu, double lambda) {
    Tensor4 t = zero(dim);
    for (int h = 0; h < dim; ++h)
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
          for (int k = 0; k < dim; ++k) {
            double v = 0.0;
            if (h == j && i == k) v += mu;
            if (h == k && i == j) v += mu;
            if (h == i && j == k) v += lambda;
            t(h, i, j, k) = v;
          }
    return t;
  }
};

inline Tensor4 operator*(double s, const Tensor4& t) {
  Tensor4 r = t;
  for (auto& v : r.a) v *= s;
  return r;
}

inline Tensor4 operator+(const Tensor4& x, const Tensor4& y) {
  Tensor4 r = x;
  for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] += y.a[i];
  return r;
}

inline void require_admissible_tensor(const Tensor4& t, double rel_tol = 1e-10) {
  const double scale = std::max(t.max_abs(), 1.0);
  if (t.max_symmetry_defect() > rel_tol * scale)
    fail(errc::invalid_tensor, "fourth-order tensor violates the required symmetries");
}

} // namespace tumorfem

#endif
