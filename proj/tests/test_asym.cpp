#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

#include "ptspec/asym.hpp"
#include "ptspec/errors.hpp"
#include "ptspec/sibuya.hpp"

using namespace ptspec;

namespace {

double km_gamma(double m) {
  return std::tgamma(1.0 / m) * std::tgamma(-0.5 - 1.0 / m) / (m * std::tgamma(-0.5));
}

double c1_formula(double m) {
  return m / 32.0 * std::tgamma(2.0 - 1.0 / m) * std::tgamma(0.5 + 1.0 / m) / std::tgamma(2.5);
}

// int_0^inf g d zeta rewritten in z: Q = z^m + 1, d zeta = sqrt(Q) dz.
double g_integral_in_z(double m) {
  auto integrand = [m](double z) {
    if (z > 1.0) {
      const double t = std::pow(z, -m);
      return std::pow(z, -0.5 * m - 2.0) *
             (-5.0 / 16.0 * m * m / std::pow(1.0 + t, 2.5) + m * (m - 1.0) / (4.0 * std::pow(1.0 + t, 1.5)));
    }
    const double q = std::pow(z, m) + 1.0;
    const double q1 = m * std::pow(z, m - 1.0), q2 = m * (m - 1.0) * std::pow(z, m - 2.0);
    return -5.0 / 16.0 * q1 * q1 / std::pow(q, 2.5) + q2 / (4.0 * std::pow(q, 1.5));
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  return ts.integrate(integrand, 0.0, 1.0) + es.integrate(integrand, 1.0, HUGE_VAL);
}

double nonint_coeff(double m) { return -std::pow(2.0, 1.0 - m) * std::tgamma(m + 1.0) / 8.0; }

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(lo * std::pow(hi / lo, double(i) / (n - 1)));
  return out;
}

}  // namespace

TEST_CASE("K_m against the Gamma-function closed form") {
  for (double m : {1.25, 1.5, 2.5, 3.0, 3.5, 6.0}) {
    CAPTURE(m);
    CHECK(std::abs(compute_Km(m) - km_gamma(m)) < 1e-10);
  }
  CHECK(compute_Km(3.0) > 0.0);
  CHECK(compute_Km(1.5) < 0.0);
  CHECK_THROWS_AS(compute_Km(2.0), DomainError);
  CHECK_THROWS_AS(compute_Km(1.0), DomainError);
}

TEST_CASE("K_m is the growth rate of f on the positive axis") {
  for (double m : {1.5, 3.0}) {
    CAPTURE(m);
    const auto p = params_from_m(m);
    std::vector<double> x, y;
    for (double l : log_grid(100.0, 1000.0, 12)) {
      x.push_back(std::pow(l, p.rho));
      y.push_back(eval_f(l, p).f.logmod + 0.25 * std::log(l));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      sx += x[i];
      sy += y[i];
      sxx += x[i] * x[i];
      sxy += x[i] * y[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope == doctest::Approx(compute_Km(m)).epsilon(0.01));
  }
}

TEST_CASE("c1 and the Beta function") {
  CHECK(beta_fn(1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(beta_fn(2.0, 3.0) == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
  for (double m : {1.5, 2.5, 3.0}) {
    CAPTURE(m);
    CHECK(compute_c1(m) == doctest::Approx(c1_formula(m)).epsilon(1e-13));
    const double direct = g_integral_in_z(m);
    CHECK(g_integral(m) == doctest::Approx(direct).epsilon(1e-9));
    CHECK(g_integral(m) == doctest::Approx(2.0 * compute_c1(m)).epsilon(0.005));
  }
}

TEST_CASE("asymptotic constants") {
  for (double m : {1.5, 2.5, 3.5}) {
    CAPTURE(m);
    const AsymConstants k = asym_constants(m);
    const double rho = 0.5 + 1.0 / m;
    CHECK(k.rho == doctest::Approx(rho));
    CHECK(k.K_m == doctest::Approx(km_gamma(m)).epsilon(1e-10));
    CHECK(k.a == doctest::Approx(kPi / (k.K_m * std::sin(kPi * rho))).epsilon(1e-13));
    CHECK(k.b == doctest::Approx(-k.a / 4.0).epsilon(1e-13));
    CHECK(k.a > 0.0);
  }
  const auto p = params_from_m(1.5);
  double prev = 0.0;
  for (int n = 1; n <= 10; ++n) {
    const double r = asr_root(n, p);
    CHECK(r < prev);
    prev = r;
  }
}

TEST_CASE("Liouville variable") {
  CHECK(std::abs(liouville_phi(0.0, 2.5)) == 0.0);
  const double z = 0.01, m = 2.5;
  const double series = z + std::pow(z, m + 1) / (2 * (m + 1));
  CHECK(std::abs(liouville_phi(z, m) - series) < 1e-12);
  CHECK(liouville_phi(1e4, 3.0).real() * std::pow(1e4, -2.5) == doctest::Approx(2.0 / 5.0).epsilon(1e-3));
  // Phi' = sqrt(z^m + 1) off the real axis.
  const cplx w(1.0, 0.5);
  const double h = 1e-5;
  const cplx deriv = (liouville_phi(w + h, m) - liouville_phi(w - h, m)) / (2 * h);
  CHECK(std::abs(deriv - std::sqrt(std::pow(w, m) + 1.0)) < 1e-8);
  CHECK_THROWS_AS(liouville_phi(std::polar(2.0, 1.5), 2.5), DomainError);
  for (double zeta : {0.01, 0.7, 5.0, 300.0}) {
    const double x = liouville_phi_inverse(zeta, m);
    CHECK(liouville_phi(x, m).real() == doctest::Approx(zeta).epsilon(1e-13));
  }
}

TEST_CASE("perturbation g near 0 and at infinity") {
  const double m = 2.5;
  CHECK(liouville_g(1e-3, m) * std::pow(1e-3, 2.0 - m) == doctest::Approx(m * (m - 1) / 4).epsilon(0.01));
  const double tail = liouville_g(1e3, m) * 1e6;
  CHECK(std::abs(tail) < 1.0);
  CHECK(tail == doctest::Approx(-m * (m + 4) / (4 * (m + 2) * (m + 2))).epsilon(0.01));
  CHECK(g_norm1(m) >= std::abs(g_integral(m)));
}

TEST_CASE("Picard iteration for F(0, mu)") {
  const double m = 2.5;
  const double f4 = picard_F0(1e4, m);
  CHECK(std::abs(f4 - 1.0) < g_norm1(m) / 2e4 * 1.1);
  CHECK_THROWS_AS(picard_F0(0.2, m), NotContractive);
  CHECK_THROWS_AS(picard_F0(-1.0, m), NotContractive);
}

TEST_CASE("Picard and Sibuya paths agree") {
  const double m = 2.5;
  const auto p = params_from_m(m);
  const double km = compute_Km(m);
  for (double mu : {10.0, 50.0, 200.0}) {
    CAPTURE(mu);
    const double l = std::pow(mu, 1.0 / p.rho);
    const double via_f = std::exp(eval_f(l, p).f.logmod + 0.25 * std::log(l) - km * mu);
    CHECK(std::abs(via_f / picard_F0(mu, m) - 1.0) < 1e-6);
  }
}

TEST_CASE("psi_fit recovers synthetic coefficients") {
  std::vector<double> mu = log_grid(20.0, 5000.0, 30), f;
  for (double x : mu) f.push_back(1 + 0.05 / x + 0.01 / (x * x) - 0.15 * std::pow(x, -2.5) + 0.02 * std::pow(x, -3.0));
  const PsiFit fixed = psi_fit(mu, f, 3, 2.5, 0.0);
  CHECK(fixed.int_coeffs[0] == doctest::Approx(0.05).epsilon(1e-9));
  CHECK(fixed.nonint_coeff == doctest::Approx(-0.15).epsilon(1e-6));
  const PsiFit free = psi_fit(mu, f, 3, 2.2, 2.8);
  CHECK(free.nonint_exponent == doctest::Approx(2.5).epsilon(1e-5));
  CHECK_THROWS_AS(psi_fit({1.0, 2.0}, {1.0}, 1, 2.5, 0.0), DomainError);
}

TEST_CASE("psi_fit on Picard samples") {
  std::vector<double> mu = log_grid(20.0, 5000.0, 40), f25, f3;
  for (double x : mu) {
    f25.push_back(picard_F0(x, 2.5));
    f3.push_back(picard_F0(x, 3.0));
  }
  const PsiFit fixed = psi_fit(mu, f25, 5, 2.5, 0.0);
  CHECK(fixed.int_coeffs[0] == doctest::Approx(compute_c1(2.5)).epsilon(0.005));
  CHECK(fixed.nonint_coeff == doctest::Approx(nonint_coeff(2.5)).epsilon(0.01));
  CHECK(!fixed.log_term);
  const PsiFit free = psi_fit(mu, f25, 5, 2.0, 3.0);
  CHECK(std::abs(free.nonint_exponent - 2.5) < 0.05);
  // Integer m: the term degenerates to mu^{-3} log mu and its coefficient vanishes.
  const PsiFit integer = psi_fit(mu, f3, 6, 3.0, 0.0);
  CHECK(integer.log_term);
  CHECK(integer.int_coeffs[0] == doctest::Approx(compute_c1(3.0)).epsilon(0.005));
  CHECK(std::abs(integer.nonint_coeff) < 1e-3 * std::abs(fixed.nonint_coeff));
}

TEST_CASE("Watson check") {
  const double r100 = watson_check(100.0, 2.5), r1000 = watson_check(1000.0, 2.5);
  CHECK(std::abs(r100 - 1.0) < 0.05);
  CHECK(std::abs(r1000 - 1.0) < std::abs(r100 - 1.0));
  CHECK(std::abs(watson_check(1000.0, 1.5) - 1.0) < 1e-3);
}

TEST_CASE("indicators") {
  const auto p = params_from_m(3.0);
  const double km = compute_Km(3.0);
  CHECK(indicator_theoretical(0.0, p) == doctest::Approx(km));
  CHECK(indicator_theoretical(0.4, p) == doctest::Approx(km * std::cos(p.rho * 0.4)));
  const auto f = [&](cplx l) { return eval_f(l, p).f; };
  std::vector<double> radii = log_grid(200.0, 2000.0, 8);
  CHECK(indicator_estimate(f, 0.4, radii, p.rho) == doctest::Approx(km * std::cos(p.rho * 0.4)).epsilon(0.02));
  // Level 1, m < 2: on the positive axis the numerator indicator is the max
  // over the two rotated copies of f.
  const auto q = params_from_m(1.5);
  const double th = 4 * kPi / (q.m + 2) - 2 * kPi;
  CHECK(indicator_piecewise_numerator(0.0, q) ==
        doctest::Approx(compute_Km(1.5) * std::cos(q.rho * th)).epsilon(1e-12));
}
