#ifndef TUMORFEM_MODEL_HPP
#define TUMORFEM_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tumorfem/errors.hpp"
#include "tumorfem/mesh.hpp"
#include "tumorfem/tensor.hpp"

namespace tumorfem {

/// Truncated logistic source: phi (1 - phi/N) inside [0, N], zero outside.
inline double alpha_eval(double phi, double n_capacity) {
  if (!(n_capacity > 0.0)) fail(errc::invalid_parameter, "alpha_eval: carrying capacity must be positive");
  if (phi < 0.0 || phi > n_capacity) return 0.0;
  return phi * (1.0 - phi / n_capacity);
}

/// Yosida approximation of the subdifferential of the indicator of [0,1]:
/// (r - clamp(r, 0, 1)) / lambda.
inline double yosida_eval(double r, double lambda) {
  if (!(lambda > 0.0)) fail(errc::invalid_parameter, "yosida_eval: lambda must be positive");
  return (r - std::clamp(r, 0.0, 1.0)) / lambda;
}

/// Moreau envelope of the indicator of [0,1]: dist(r, [0,1])^2 / (2 lambda).
/// Its derivative is yosida_eval; used by the damage energy ledger.
inline double yosida_primal(double r, double lambda) {
  if (!(lambda > 0.0)) fail(errc::invalid_parameter, "yosida_primal: lambda must be positive");
  const double d = r - std::clamp(r, 0.0, 1.0);
  return 0.5 * d * d / lambda;
}

/// Declared bounds and constants, mirroring the coefficient hypotheses.
/// Zero Lipschitz entries mean "not declared".
struct CoefficientBounds {
  double p_star = 0.0;
  double g_star = 0.0;
  double k1_star = 0.0;
  double k2_lower = 0.0;
  double k2_star = 0.0;
  double J_star = 0.0;
  double A_ellipticity = 0.0; // A eps : eps >= C |eps|^2
  double A_sup = 0.0;         // bound on |a_hijk|
  double B_sup = 0.0;
  double pi_lipschitz = 0.0;
  double w_sup = 0.0;
  double psi_lipschitz = 0.0; // C_Psi
  double M0 = 0.0;            // bound on sigma_Gamma and sigma_0
  double lip_p = 0.0;         // stronger hypotheses for continuous dependence
  double lip_g = 0.0;
  double lip_k1 = 0.0;
  double lip_k2 = 0.0;
  double lip_J = 0.0;
  double lip_AB = 0.0; // tensor entry Lipschitz constant in (phi, z)
  double lip_w_time = 0.0;
  bool smooth_initial_data = false;
};

/// The full coefficient bundle of the coupled system. Immutable by convention
/// after construction; every evaluation is a pure function call.
struct ModelCoefficients {
  int dim = 1;
  double N = 1.0;      // carrying capacity
  double T = 1.0;      // final time
  double lambda = 0.05; // Yosida regularization parameter

  std::function<double(double sigma, double z)> p, g;
  std::function<double(double phi, double z)> k1, k2, J;
  std::function<Tensor4(double phi, double z)> A_tensor, B_tensor;
  std::function<std::array<double, 2>(Point, double t)> f;
  std::function<double(double r)> pi;
  std::function<double(Point, double t)> w;
  std::function<double(Point, double phi, const Mat2& eps)> psi;
  std::function<double(Point, double t)> sigma_gamma;
  std::function<double(Point)> phi0, sigma0, z0;
  std::function<std::array<double, 2>(Point)> u0;

  CoefficientBounds bounds;
  Point box_lo{0.0, 0.0}; // spatial sampling box for hypothesis validation
  Point box_hi{1.0, 1.0};

  // beta is the subdifferential of the indicator of [0,1]; the Yosida pair
  // (yosida_eval, yosida_primal) is its closed-form regularization.
};

inline double psi_eval(const ModelCoefficients& coeffs, Point x, double phi, const Mat2& eps) {
  return coeffs.psi(x, phi, eps);
}

/// The invariant-region ceiling for the lactate: max{M0, J*} e^T.
inline double sigma_bound_m(const CoefficientBounds& bounds, double T) {
  return std::max(bounds.M0, bounds.J_star) * std::exp(T);
}

struct HypothesisCheck {
  std::string id;
  std::string description;
  bool passed = true;
  double worst_violation = 0.0;
  std::string witness;
};

struct ValidationReport {
  std::vector<HypothesisCheck> checks;

  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }

  std::string summary() const {
    std::ostringstream os;
    for (const auto& c : checks) {
      os << (c.passed ? "pass " : "FAIL ") << c.id << "  " << c.description;
      if (!c.passed) os << "  [violation " << c.worst_violation << " at " << c.witness << "]";
      os << "\n";
    }
    return os.str();
  }
};

namespace detail {

struct Checker {
  HypothesisCheck check;
  double tol;

  Checker(std::string id, std::string description, double tolerance = 1e-9)
      : check{std::move(id), std::move(description), true, 0.0, {}}, tol(tolerance) {}

  void require(double violation, const std::string& witness) {
    if (violation > check.worst_violation) {
      check.worst_violation = violation;
      check.witness = witness;
    }
    if (violation > tol) check.passed = false;
  }
};

inline std::string fmt_point2(double a, double b) {
  std::ostringstream os;
  os << "(" << a << ", " << b << ")";
  return os.str();
}

} // namespace detail

/// Monte-Carlo verification of the coefficient hypotheses over the invariant
/// box (phi, sigma, z) in [0,N] x [0,M] x [0,1] and the spatial sampling box.
/// Failures are reported, not thrown.
inline ValidationReport validate_hypotheses(const ModelCoefficients& coeffs, int samples, std::uint64_t seed = 20240601) {
  if (samples < 1) fail(errc::invalid_parameter, "validate_hypotheses: samples must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto& b = coeffs.bounds;
  const double m_sigma = sigma_bound_m(b, coeffs.T);
  const int dim = coeffs.dim;

  auto rand_phi = [&]() { return coeffs.N * unit(rng); };
  auto rand_sigma = [&]() { return m_sigma * unit(rng); };
  auto rand_z = [&]() { return unit(rng); };
  auto rand_point = [&]() {
    Point p{0.0, 0.0};
    for (int d = 0; d < dim; ++d) p[d] = coeffs.box_lo[d] + (coeffs.box_hi[d] - coeffs.box_lo[d]) * unit(rng);
    return p;
  };
  auto rand_time = [&]() { return coeffs.T * unit(rng); };
  auto rand_sym = [&]() {
    Mat2 eps = Mat2::zero(dim);
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j) {
        const double v = 2.0 * unit(rng) - 1.0;
        eps(i, j) = v;
        eps(j, i) = v;
      }
    return eps;
  };

  ValidationReport report;

  {
    detail::Checker c("A1", "0 <= p <= p*, 0 <= g <= g*, N > 0");
    if (!(coeffs.N > 0.0)) c.require(1.0, "N");
    for (int s = 0; s < samples; ++s) {
      const double sg = rand_sigma(), z = rand_z();
      const double pv = coeffs.p(sg, z), gv = coeffs.g(sg, z);
      c.require(std::max(-pv, pv - b.p_star), "p at " + detail::fmt_point2(sg, z));
      c.require(std::max(-gv, gv - b.g_star), "g at " + detail::fmt_point2(sg, z));
    }
    report.checks.push_back(c.check);
  }
  {
    detail::Checker c("A2", "0 <= k1 <= k1*, 0 < k2_lower <= k2 <= k2*, 0 <= J <= J*");
    if (!(b.k2_lower > 0.0)) c.require(1.0, "declared k2_lower");
    for (int s = 0; s < samples; ++s) {
      const double phi = rand_phi(), z = rand_z();
      const double k1v = coeffs.k1(phi, z), k2v = coeffs.k2(phi, z), jv = coeffs.J(phi, z);
      const std::string at = detail::fmt_point2(phi, z);
      c.require(std::max(-k1v, k1v - b.k1_star), "k1 at " + at);
      c.require(std::max(b.k2_lower - k2v, k2v - b.k2_star), "k2 at " + at);
      c.require(std::max(-jv, jv - b.J_star), "J at " + at);
    }
    report.checks.push_back(c.check);
  }
  {
    detail::Checker c("A3", "A, B symmetric and bounded; A elliptic; B positive semidefinite");
    const int tensor_samples = std::max(1, samples / 10);
    for (int s = 0; s < tensor_samples; ++s) {
      const double phi = rand_phi(), z = rand_z();
      const std::string at = detail::fmt_point2(phi, z);
      const Tensor4 a = coeffs.A_tensor(phi, z);
      const Tensor4 bb = coeffs.B_tensor(phi, z);
      c.require(a.max_symmetry_defect(), "A symmetry at " + at);
      c.require(bb.max_symmetry_defect(), "B symmetry at " + at);
      c.require(a.max_abs() - b.A_sup, "A bound at " + at);
      c.require(bb.max_abs() - b.B_sup, "B bound at " + at);
      for (int t = 0; t < 8; ++t) {
        const Mat2 eps = rand_sym();
        const double eps2 = ddot(eps, eps);
        if (eps2 == 0.0) continue;
        c.require((b.A_ellipticity * eps2 - ddot(a.apply(eps), eps)) / eps2, "A ellipticity at " + at);
        c.require(-ddot(bb.apply(eps), eps) / eps2, "B semidefiniteness at " + at);
      }
    }
    report.checks.push_back(c.check);
  }
  {
    detail::Checker c("A4", "beta is the indicator subdifferential of [0,1] (built-in)");
    report.checks.push_back(c.check);
  }
  {
    detail::Checker c("A5", "pi Lipschitz and nonincreasing (concave primitive)");
    for (int s = 0; s < samples; ++s) {
      const double r1 = -0.5 + 2.0 * unit(rng);
      const double r2 = -0.5 + 2.0 * unit(rng);
      const double d = std::abs(coeffs.pi(r1) - coeffs.pi(r2));
      c.require(d - b.pi_lipschitz * std::abs(r1 - r2), "pi pair " + detail::fmt_point2(r1, r2));
      const double lo = std::min(r1, r2), hi = std::max(r1, r2);
      c.require(coeffs.pi(hi) - coeffs.pi(lo), "pi monotonicity " + detail::fmt_point2(lo, hi));
    }
    report.checks.push_back(c.check);
  }
  {
    detail::Checker c("A6", "|w| <= declared bound");
    for (int s = 0; s < samples; ++s) {
      const Point x = rand_point();
      const double t = rand_time();
      c.require(std::abs(coeffs.w(x, t)) - b.w_sup, "w at x=" + detail::fmt_point2(x[0], x[1]));
    }
    report.checks.push_back(c.check);
  }
  {
    detail::Checker c("A7", "Psi Lipschitz in (phi, eps) with constant C_Psi");
    for (int s = 0; s < samples; ++s) {
      const Point x = rand_point();
      const double phi1 = rand_phi(), phi2 = rand_phi();
      const Mat2 e1 = rand_sym(), e2 = rand_sym();
      const double d = std::abs(coeffs.psi(x, phi1, e1) - coeffs.psi(x, phi2, e2));
      const double allowed = b.psi_lipschitz * (std::abs(phi1 - phi2) + (e1 - e2).frobenius());
      c.require(d - allowed, "psi pair at x=" + detail::fmt_point2(x[0], x[1]));
    }
    report.checks.push_back(c.check);
  }
  {
    detail::Checker c("A8", "0 <= sigma_Gamma <= M0 on the boundary");
    for (int s = 0; s < samples; ++s) {
      Point x = rand_point();
      // project onto a random face of the sampling box
      const int face = static_cast<int>(unit(rng) * 2 * dim) % (2 * dim);
      x[face / 2] = (face % 2 == 0) ? coeffs.box_lo[face / 2] : coeffs.box_hi[face / 2];
      const double t = rand_time();
      const double v = coeffs.sigma_gamma(x, t);
      c.require(std::max(-v, v - b.M0), "sigma_Gamma at x=" + detail::fmt_point2(x[0], x[1]));
    }
    report.checks.push_back(c.check);
  }
  {
    detail::Checker c("A9", "initial data within bounds; u0 vanishes on the boundary");
    for (int s = 0; s < samples; ++s) {
      const Point x = rand_point();
      const std::string at = "x=" + detail::fmt_point2(x[0], x[1]);
      const double phi0 = coeffs.phi0(x), sigma0 = coeffs.sigma0(x), z0 = coeffs.z0(x);
      c.require(std::max(-phi0, phi0 - coeffs.N), "phi0 at " + at);
      c.require(std::max(-sigma0, sigma0 - b.M0), "sigma0 at " + at);
      c.require(std::max(-z0, z0 - 1.0), "z0 at " + at);
      Point xb = x;
      const int face = static_cast<int>(unit(rng) * 2 * dim) % (2 * dim);
      xb[face / 2] = (face % 2 == 0) ? coeffs.box_lo[face / 2] : coeffs.box_hi[face / 2];
      const auto ub = coeffs.u0(xb);
      for (int dcomp = 0; dcomp < dim; ++dcomp) c.require(std::abs(ub[dcomp]), "u0 trace at " + at);
    }
    report.checks.push_back(c.check);
  }

  auto lipschitz_pair_check = [&](const std::string& id, const std::string& name, double lip,
                                  const std::function<double(double, double)>& fn, double range1, double range2) {
    detail::Checker c(id, name + " Lipschitz with declared constant");
    if (lip <= 0.0) {
      c.check.passed = false;
      c.check.witness = "constant not declared";
      c.check.worst_violation = 1.0;
    } else {
      for (int s = 0; s < samples; ++s) {
        const double a1 = range1 * unit(rng), a2 = range1 * unit(rng);
        const double b1 = range2 * unit(rng), b2 = range2 * unit(rng);
        const double d = std::abs(fn(a1, b1) - fn(a2, b2));
        c.require(d - lip * (std::abs(a1 - a2) + std::abs(b1 - b2)),
                  name + " pair " + detail::fmt_point2(a1, b1));
      }
    }
    report.checks.push_back(c.check);
  };

  lipschitz_pair_check("B1a", "p", b.lip_p, coeffs.p, m_sigma, 1.0);
  lipschitz_pair_check("B1b", "g", b.lip_g, coeffs.g, m_sigma, 1.0);
  lipschitz_pair_check("B2a", "k1", b.lip_k1, coeffs.k1, coeffs.N, 1.0);
  lipschitz_pair_check("B2b", "k2", b.lip_k2, coeffs.k2, coeffs.N, 1.0);
  lipschitz_pair_check("B2c", "J", b.lip_J, coeffs.J, coeffs.N, 1.0);
  {
    detail::Checker c("B2d", "A, B entries Lipschitz in (phi, z) with declared constant");
    if (b.lip_AB <= 0.0) {
      c.check.passed = false;
      c.check.witness = "constant not declared";
      c.check.worst_violation = 1.0;
    } else {
      const int tensor_samples = std::max(1, samples / 10);
      for (int s = 0; s < tensor_samples; ++s) {
        const double phi1 = rand_phi(), z1 = rand_z(), phi2 = rand_phi(), z2 = rand_z();
        const double dist = std::abs(phi1 - phi2) + std::abs(z1 - z2);
        auto defect = [&](const Tensor4& t1, const Tensor4& t2) {
          double m = 0.0;
          for (std::size_t i = 0; i < t1.a.size(); ++i) m = std::max(m, std::abs(t1.a[i] - t2.a[i]));
          return m;
        };
        c.require(defect(coeffs.A_tensor(phi1, z1), coeffs.A_tensor(phi2, z2)) - b.lip_AB * dist, "A pair");
        c.require(defect(coeffs.B_tensor(phi1, z1), coeffs.B_tensor(phi2, z2)) - b.lip_AB * dist, "B pair");
      }
    }
    report.checks.push_back(c.check);
  }
  {
    detail::Checker c("B3", "w Lipschitz in time with declared constant");
    if (b.lip_w_time < 0.0) {
      c.check.passed = false;
    } else {
      for (int s = 0; s < samples; ++s) {
        const Point x = rand_point();
        const double t1 = rand_time(), t2 = rand_time();
        c.require(std::abs(coeffs.w(x, t1) - coeffs.w(x, t2)) - b.lip_w_time * std::abs(t1 - t2),
                  "w at x=" + detail::fmt_point2(x[0], x[1]));
      }
    }
    report.checks.push_back(c.check);
  }
  {
    detail::Checker c("B4", "regular initial data declared; minimal section of beta finite at z0");
    if (!b.smooth_initial_data) {
      c.check.passed = false;
      c.check.witness = "smooth_initial_data not declared";
      c.check.worst_violation = 1.0;
    }
    report.checks.push_back(c.check);
  }

  return report;
}

/// Tunable constants for the named presets; every preset passes
/// validate_hypotheses with the bounds it declares.
struct PresetOptions {
  int dim = 1;
  Point box_lo{0.0, 0.0};
  Point box_hi{1.0, 1.0};
  double T = 1.0;
  double lambda = 0.05;
  double N = 1.0;
  double M0 = 1.0;
  double p_scale = 1.0;
  double g_scale = 0.5;
  double k1_scale = 1.0;
  double k2_value = 1.0;
  double J_scale = 1.0;
  double mu_v = 1.0; // viscosity tensor 2 mu_v eps + lambda_v tr(eps) I
  double lambda_v = 0.5;
  double mu_e = 0.5; // elasticity tensor
  double lambda_e = 0.25;
  double pi_slope = 0.1;
  double w_value = 0.2;
  double sigma_gamma_value = 0.5;
  double fx = 0.0, fy = 0.0;
  double psi_c_phi = 0.3;
  double psi_c_eps = 0.3;
};

namespace detail {

inline double logistic(double r) { return 1.0 / (1.0 + std::exp(-r)); }

/// C1 ramp: 0 below 0, 1 above 1, cubic smoothstep in between.
inline double smooth_clamp01(double r) {
  if (r <= 0.0) return 0.0;
  if (r >= 1.0) return 1.0;
  return r * r * (3.0 - 2.0 * r);
}

inline std::function<double(Point)> cosine_bump(Point lo, Point hi, int dim, double base, double amplitude) {
  return [=](Point x) {
    double prod = 1.0;
    for (int d = 0; d < dim; ++d) {
      const double hat = (x[d] - lo[d]) / (hi[d] - lo[d]);
      prod *= std::cos(M_PI * hat);
    }
    return base + amplitude * prod;
  };
}

} // namespace detail

inline ModelCoefficients preset(const std::string& name, const PresetOptions& opt = {}) {
  ModelCoefficients c;
  c.dim = opt.dim;
  c.N = opt.N;
  c.T = opt.T;
  c.lambda = opt.lambda;
  c.box_lo = opt.box_lo;
  c.box_hi = opt.box_hi;
  auto& b = c.bounds;
  b.M0 = opt.M0;

  const Tensor4 iso_a = Tensor4::isotropic(opt.dim, opt.mu_v, opt.lambda_v);
  const Tensor4 iso_b = Tensor4::isotropic(opt.dim, opt.mu_e, opt.lambda_e);

  const bool known = (name == "isotropic_baseline" || name == "damage_softening" || name == "decoupled_heat");
  if (!known) fail(errc::unknown_preset, name);
  const bool decoupled = (name == "decoupled_heat");
  const bool softening = (name == "damage_softening");

  if (decoupled) {
    c.p = [](double, double) { return 0.0; };
    c.g = [](double, double) { return 0.0; };
    c.k1 = [](double, double) { return 0.0; };
    c.J = [](double, double) { return 0.0; };
    b.p_star = b.g_star = b.k1_star = b.J_star = 1e-12;
    b.lip_p = b.lip_g = b.lip_k1 = b.lip_J = 1e-12;
  } else {
    const double ps = opt.p_scale, gs = opt.g_scale, k1s = opt.k1_scale, js = opt.J_scale;
    c.p = [ps](double sigma, double z) { return ps * detail::logistic(sigma) * (0.2 + 0.8 * detail::logistic(z)); };
    c.g = [gs](double sigma, double z) { return gs * detail::logistic(1.0 - sigma) * (0.3 + 0.7 * detail::logistic(-z)); };
    c.k1 = [k1s](double phi, double z) { return k1s * detail::logistic(phi + z); };
    c.J = [js](double phi, double z) { return js * (0.3 + 0.7 * detail::logistic(phi - z)); };
    b.p_star = ps;
    b.g_star = gs;
    b.k1_star = k1s;
    b.J_star = js;
    b.lip_p = 0.3 * ps;
    b.lip_g = 0.3 * gs;
    b.lip_k1 = 0.3 * k1s;
    b.lip_J = 0.2 * js;
  }
  const double k2v = opt.k2_value;
  c.k2 = [k2v](double, double) { return k2v; };
  b.k2_lower = b.k2_star = k2v;
  b.lip_k2 = 1e-12;

  if (softening) {
    constexpr double delta = 0.2;
    c.A_tensor = [iso_a](double, double z) { return (delta + (1.0 - delta) * detail::smooth_clamp01(z)) * iso_a; };
    c.B_tensor = [iso_b](double, double z) { return (delta + (1.0 - delta) * detail::smooth_clamp01(z)) * iso_b; };
    b.A_ellipticity = delta * 2.0 * opt.mu_v;
    b.lip_AB = 1.3 * (2.0 * opt.mu_v + opt.lambda_v); // smoothstep slope 1.5 times (1 - delta)
  } else {
    c.A_tensor = [iso_a](double, double) { return iso_a; };
    c.B_tensor = decoupled ? std::function<Tensor4(double, double)>([d = opt.dim](double, double) { return Tensor4::zero(d); })
                           : std::function<Tensor4(double, double)>([iso_b](double, double) { return iso_b; });
    b.A_ellipticity = 2.0 * opt.mu_v;
    b.lip_AB = 1e-12;
  }
  b.A_sup = (2.0 * opt.mu_v + opt.lambda_v) * (1.0 + 1e-9);
  b.B_sup = decoupled ? 1e-12 : (2.0 * opt.mu_e + opt.lambda_e) * (1.0 + 1e-9);

  const double fx = opt.fx, fy = opt.fy;
  c.f = [fx, fy](Point, double) { return std::array<double, 2>{fx, fy}; };

  if (decoupled) {
    c.pi = [](double) { return 0.0; };
    b.pi_lipschitz = 1e-12;
    c.w = [](Point, double) { return 0.0; };
    b.w_sup = 1e-12;
    b.lip_w_time = 1e-12;
    c.psi = [](Point, double, const Mat2&) { return 0.0; };
    b.psi_lipschitz = 1e-12;
    c.sigma_gamma = [](Point, double) { return 0.0; };
  } else {
    const double slope = opt.pi_slope;
    c.pi = [slope](double r) { return slope * (0.5 - r); };
    b.pi_lipschitz = slope;
    const double wv = opt.w_value;
    c.w = [wv](Point, double) { return wv; };
    b.w_sup = std::abs(wv) + 1e-12;
    b.lip_w_time = 1e-12;
    const double cphi = opt.psi_c_phi, ceps = opt.psi_c_eps;
    c.psi = [cphi, ceps](Point, double phi, const Mat2& eps) { return cphi * phi + ceps * eps.frobenius(); };
    b.psi_lipschitz = std::max(cphi, ceps);
    const double sg = opt.sigma_gamma_value;
    c.sigma_gamma = [sg](Point, double) { return sg; };
  }

  if (decoupled) {
    c.phi0 = detail::cosine_bump(opt.box_lo, opt.box_hi, opt.dim, 0.5 * opt.N, 0.5 * opt.N);
    c.sigma0 = detail::cosine_bump(opt.box_lo, opt.box_hi, opt.dim, 0.2 * opt.M0, 0.1 * opt.M0);
    c.z0 = detail::cosine_bump(opt.box_lo, opt.box_hi, opt.dim, 0.5, 0.2);
  } else {
    c.phi0 = detail::cosine_bump(opt.box_lo, opt.box_hi, opt.dim, 0.4 * opt.N, 0.2 * opt.N);
    c.sigma0 = detail::cosine_bump(opt.box_lo, opt.box_hi, opt.dim, 0.3 * opt.M0, 0.2 * opt.M0);
    c.z0 = detail::cosine_bump(opt.box_lo, opt.box_hi, opt.dim, 0.8, -0.15);
  }
  c.u0 = [](Point) { return std::array<double, 2>{0.0, 0.0}; };
  b.smooth_initial_data = true;

  return c;
}

} // namespace tumorfem

#endif
