#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "tumorfem/model.hpp"

using namespace tumorfem;

TEST_CASE("truncated logistic source") {
  CHECK(alpha_eval(1.0, 2.0) == Catch::Approx(0.5));
  CHECK(alpha_eval(3.0, 2.0) == 0.0);
  CHECK(alpha_eval(2.0, 2.0) == 0.0);
  CHECK(alpha_eval(-0.1, 2.0) == 0.0);
  CHECK_THROWS_MATCHES(alpha_eval(1.0, 0.0), error,
                       Catch::Matchers::Predicate<error>([](const error& e) { return e.code() == errc::invalid_parameter; }));
}

TEST_CASE("truncation is continuous at the seams") {
  for (double n_cap : {1.0, 2.0, 7.5}) {
    for (double seam : {0.0, n_cap}) {
      CHECK(std::abs(alpha_eval(seam + 1e-9, n_cap) - alpha_eval(seam, n_cap)) <= 1e-8);
      CHECK(std::abs(alpha_eval(seam - 1e-9, n_cap) - alpha_eval(seam, n_cap)) <= 1e-8);
    }
  }
}

TEST_CASE("Yosida approximation of the constraint subdifferential") {
  CHECK(yosida_eval(0.5, 0.1) == 0.0);
  CHECK(yosida_eval(1.2, 0.1) == Catch::Approx(2.0));
  CHECK(yosida_eval(-0.05, 0.05) == Catch::Approx(-1.0));
  CHECK_THROWS_MATCHES(yosida_eval(0.5, 0.0), error,
                       Catch::Matchers::Predicate<error>([](const error& e) { return e.code() == errc::invalid_parameter; }));

  // exact zero on [0,1]: the minimal section of the graph
  for (double r : {0.0, 0.25, 0.5, 0.999, 1.0}) CHECK(yosida_eval(r, 0.05) == 0.0);

  // monotone nondecreasing on sorted random samples
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-2.0, 3.0);
  std::vector<double> samples(300);
  for (double& s : samples) s = dist(rng);
  std::sort(samples.begin(), samples.end());
  for (std::size_t i = 1; i < samples.size(); ++i)
    CHECK(yosida_eval(samples[i], 0.1) >= yosida_eval(samples[i - 1], 0.1));
}

TEST_CASE("Moreau envelope differentiates to the Yosida operator") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(-2.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const double r = dist(rng);
    const double h = 1e-6;
    const double fd = (yosida_primal(r + h, 0.1) - yosida_primal(r - h, 0.1)) / (2 * h);
    CHECK(fd == Catch::Approx(yosida_eval(r, 0.1)).margin(2e-6));
  }
}

TEST_CASE("default psi evaluation") {
  PresetOptions opt;
  opt.psi_c_phi = 1.0;
  opt.psi_c_eps = 2.0;
  const ModelCoefficients coeffs = preset("isotropic_baseline", opt);
  CHECK(psi_eval(coeffs, {0.3, 0.0}, 0.0, Mat2::zero(1)) == 0.0);
  Mat2 eps = Mat2::zero(2);
  eps(0, 0) = 1.0;
  CHECK(psi_eval(coeffs, {0.3, 0.0}, 3.0, eps) == Catch::Approx(5.0));
}

TEST_CASE("default psi is Lipschitz with the declared constant") {
  PresetOptions opt;
  opt.psi_c_phi = 0.4;
  opt.psi_c_eps = 0.7;
  opt.dim = 2;
  const ModelCoefficients coeffs = preset("isotropic_baseline", opt);
  const double c = std::max(opt.psi_c_phi, opt.psi_c_eps);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int i = 0; i < 1000; ++i) {
    Mat2 e1 = Mat2::zero(2), e2 = Mat2::zero(2);
    for (int r = 0; r < 2; ++r)
      for (int s = r; s < 2; ++s) {
        e1(r, s) = e1(s, r) = dist(rng);
        e2(r, s) = e2(s, r) = dist(rng);
      }
    const double phi1 = dist(rng), phi2 = dist(rng);
    const double d = std::abs(psi_eval(coeffs, {0, 0}, phi1, e1) - psi_eval(coeffs, {0, 0}, phi2, e2));
    CHECK(d <= c * (std::abs(phi1 - phi2) + (e1 - e2).frobenius()) + 1e-12);
  }
}

TEST_CASE("hypothesis validation flags violated bounds with a witness") {
  ModelCoefficients coeffs = preset("isotropic_baseline");
  coeffs.p = [](double, double) { return 0.5; };
  coeffs.bounds.p_star = 1.0;
  ValidationReport ok = validate_hypotheses(coeffs, 500);
  CHECK(ok.checks[0].id == "A1");
  CHECK(ok.checks[0].passed);

  coeffs.k2 = [](double, double) { return 0.0; };
  coeffs.bounds.k2_lower = 0.1;
  ValidationReport bad = validate_hypotheses(coeffs, 500);
  const auto& a2 = bad.checks[1];
  CHECK(a2.id == "A2");
  CHECK_FALSE(a2.passed);
  CHECK(a2.worst_violation >= 0.1);
  CHECK(a2.witness.find("k2") != std::string::npos);
}

TEST_CASE("identity tensor passes symmetry and ellipticity with constant one") {
  ModelCoefficients coeffs = preset("isotropic_baseline");
  coeffs.A_tensor = [](double, double) { return Tensor4::identity(1); };
  coeffs.bounds.A_ellipticity = 1.0;
  coeffs.bounds.A_sup = 1.0 + 1e-12;
  const ValidationReport report = validate_hypotheses(coeffs, 2000);
  for (const auto& c : report.checks)
    if (c.id == "A3") CHECK(c.passed);
}

TEST_CASE("preset ellipticity constants") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  auto min_rayleigh = [&](const Tensor4& t) {
    double lo = 1e300;
    for (int i = 0; i < 4000; ++i) {
      Mat2 eps = Mat2::zero(t.dim);
      for (int r = 0; r < t.dim; ++r)
        for (int s = r; s < t.dim; ++s) eps(r, s) = eps(s, r) = dist(rng);
      const double e2 = ddot(eps, eps);
      if (e2 < 1e-12) continue;
      lo = std::min(lo, ddot(t.apply(eps), eps) / e2);
    }
    return lo;
  };

  PresetOptions opt;
  opt.dim = 2;
  const ModelCoefficients base = preset("isotropic_baseline", opt);
  CHECK(min_rayleigh(base.A_tensor(0.5, 0.5)) == Catch::Approx(2.0).epsilon(1e-3));
  CHECK(base.bounds.A_ellipticity == Catch::Approx(2.0));

  const ModelCoefficients soft = preset("damage_softening", opt);
  CHECK(min_rayleigh(soft.A_tensor(0.5, 0.0)) == Catch::Approx(0.4).epsilon(1e-3));
  CHECK(soft.bounds.A_ellipticity == Catch::Approx(0.4));
}

TEST_CASE("all presets pass hypothesis validation at ten thousand samples") {
  for (const char* name : {"isotropic_baseline", "damage_softening", "decoupled_heat"}) {
    for (int dim : {1, 2}) {
      PresetOptions opt;
      opt.dim = dim;
      const ModelCoefficients coeffs = preset(name, opt);
      const ValidationReport report = validate_hypotheses(coeffs, 10000);
      INFO(name << " dim " << dim << "\n" << report.summary());
      CHECK(report.all_passed());
    }
  }
}

TEST_CASE("unknown preset name") {
  CHECK_THROWS_MATCHES(preset("banana"), error,
                       Catch::Matchers::Predicate<error>([](const error& e) { return e.code() == errc::unknown_preset; }));
}
