#include <doctest.h>

#include <cmath>
#include <random>

#include "ptspec/asym.hpp"
#include "ptspec/determinants.hpp"
#include "ptspec/errors.hpp"
#include "ptspec/oracles.hpp"
#include "ptspec/sibuya.hpp"
#include "ptspec/zeros.hpp"

using namespace ptspec;

namespace {

// Coefficient of mu^{-m} in F(0, mu) from Watson's lemma on the 2 mu kernel.
double nonint_coeff(double m) { return -std::pow(2.0, 1.0 - m) * std::tgamma(m + 1.0) / 8.0; }

}  // namespace

TEST_CASE("C and D are real on the real axis") {
  for (double m : {1.5, 3.0}) {
    const auto p = params_from_m(m, 1);
    for (double x : {-7.3, -0.5, 2.1, 15.0}) {
      CAPTURE(m);
      CAPTURE(x);
      const cplx c = eval_C(x, p).value.to_complex();
      CHECK(std::abs(c.imag()) <= 1e-7 * std::abs(c));
    }
  }
  const auto q = params_from_m(3.5, 2);
  for (double x : {-4.0, 0.7, 6.2, 30.0}) {
    CAPTURE(x);
    const cplx d = eval_D(x, q).value.to_complex();
    CHECK(std::abs(d.imag()) <= 1e-7 * std::abs(d));
  }
}

TEST_CASE("numerator of C is conjugate symmetric") {
  const auto p = params_from_m(1.5);
  for (cplx l : {cplx(2.0, 1.0), cplx(-9.0, 3.5), cplx(0.3, -4.0)}) {
    const cplx a = eval_numerator_C(l, p).to_complex();
    const cplx b = eval_numerator_C(std::conj(l), p).to_complex();
    CHECK(std::abs(a - std::conj(b)) < 1e-9 * std::abs(a));
  }
}

TEST_CASE("C does not vanish at lambda = 3 for m = 1.5") {
  const auto d = eval_C(3.0, params_from_m(1.5));
  CHECK(std::isfinite(d.value.logmod));
  CHECK(d.value.logmod > -5.0);
}

TEST_CASE("level-2 identity D = C(omega l) C(omega^-1 l) - 1") {
  const auto p2 = params_from_m(3.5, 2);
  const auto p1 = params_from_m(3.5, 1);
  std::mt19937_64 rng(20240917);
  std::uniform_real_distribution<double> rad(0.0, 20.0), ang(-kPi, kPi);
  int bad = 0;
  for (int i = 0; i < 50; ++i) {
    const cplx l = std::polar(std::sqrt(rad(rng) * 20.0), ang(rng));
    const cplx d = eval_D(l, p2).value.to_complex();
    const cplx c1 = eval_C(p2.omega * l, p1).value.to_complex();
    const cplx c2 = eval_C(std::conj(p2.omega) * l, p1).value.to_complex();
    const cplx rhs = c1 * c2 - 1.0;
    const double scale = 1.0 + std::abs(c1 * c2);
    if (std::abs(d - rhs) > 1e-6 * scale) {
      ++bad;
      MESSAGE("lambda = " << l << ": D = " << d << ", C C - 1 = " << rhs);
    }
  }
  CHECK(bad == 0);
}

TEST_CASE("numerator of C at regular points over zeros of f") {
  const auto p = params_from_m(1.5);
  const auto zs = find_real_zeros(make_func(FuncId::F, p), -16.0, -0.5, 0.25);
  REQUIRE(zs.size() == 6);
  for (double z : zs) {
    CAPTURE(z);
    const LogValue n = eval_numerator_C(z, p);
    const double scale = std::max(eval_f_rotated(1, z, p).f.logmod, eval_f_rotated(-1, z, p).f.logmod);
    CHECK(n.logmod - scale < std::log(1e-4));
    const DetValue c = eval_C(z, p);
    CHECK((c.flags & kDivisionNearZero));
    CHECK(std::isfinite(c.value.logmod));
    // Regularised value sits between its neighbours on the axis.
    const double left = eval_C(z - 0.05, p).value.to_complex().real();
    const double right = eval_C(z + 0.05, p).value.to_complex().real();
    const double mid = c.value.to_complex().real();
    CHECK(std::abs(mid - 0.5 * (left + right)) < 0.05 * (std::abs(left) + std::abs(right)));
  }
}

TEST_CASE("numerator of C grows like exp(-K_m lambda^rho) for 1 < m < 2") {
  for (double m : {1.25, 1.5}) {
    CAPTURE(m);
    const auto p = params_from_m(m);
    std::vector<double> x, y;
    for (int i = 0; i <= 12; ++i) {
      const double l = 50.0 * std::pow(10.0, i / 12.0);
      const LogValue n = eval_numerator_C(l, p);
      x.push_back(std::pow(l, p.rho));
      y.push_back(n.logmod + (m * p.rho + 0.25) * std::log(l));
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double k = double(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      sx += x[i];
      sy += y[i];
      sxx += x[i] * x[i];
      sxy += x[i] * y[i];
    }
    const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / k;
    const double km = std::tgamma(1.0 / m) * std::tgamma(-0.5 - 1.0 / m) / (m * std::tgamma(-0.5));
    CHECK(slope == doctest::Approx(-km).epsilon(0.02));
    CHECK(std::exp(icpt) == doctest::Approx(2.0 * std::abs(std::sin(kPi * m) * nonint_coeff(m))).epsilon(0.01));
  }
}

TEST_CASE("numerator of D carries 2 sin(pi m) times the non-integer coefficient") {
  auto coeff = [](double m, double l) {
    const auto p = params_from_m(m, 2);
    const LogValue n = eval_numerator_D(l, p);
    return (n * LogValue::from_log(cplx((m * p.rho + 0.5) * std::log(l), 0.0))).to_complex();
  };
  for (auto [m, l, tol] : {std::tuple{2.5, 300.0, 0.01}, {3.25, 300.0, 0.01}, {3.5, 1000.0, 0.05}}) {
    CAPTURE(m);
    const cplx c = coeff(m, l);
    const double expect = 2.0 * std::sin(kPi * m) * nonint_coeff(m);
    CHECK(std::abs(c.imag()) < 1e-6 * std::abs(c));
    CHECK(c.real() == doctest::Approx(expect).epsilon(tol));
  }
  // Integer m: the term cancels completely.
  CHECK(std::abs(coeff(3.0, 300.0)) < 1e-3 * std::abs(coeff(2.5, 300.0)));
}

TEST_CASE("sign calibration selects lambda = +E and is involutive") {
  for (int M : {1, 2}) {
    CAPTURE(M);
    const EigenMap& map = calibrated_map(M);
    CHECK(map.calibrated);
    CHECK(map.sign == 1);
    CHECK(map.match_error < 1e-5);
    for (cplx e : {cplx(1.3, 0.0), cplx(-2.0, 4.5), cplx(7.0, -0.25)})
      CHECK(std::abs(map.E_of_lambda(map.lambda_of_E(e)) - e) == 0.0);
  }
  EigenMap raw;
  CHECK_THROWS_AS(raw.E_of_lambda(1.0), CalibrationAmbiguous);
  CHECK_THROWS_AS(calibrate_sign(make_params(3, 0.5, 1, true)), DomainError);
}

TEST_CASE("determinant zeros reproduce the cubic and quartic spectra") {
  std::vector<double> cubic;
  for (const auto& e : cubic_pt_spectrum(200, 2.5))
    if (e.real() > 0 && cubic.size() < 3) cubic.push_back(e.real());
  const auto c = real_det_zeros(make_params(1, 1.0, 1), 0.2, 9.0, 0.2);
  REQUIRE(c.size() >= 3);
  for (int i = 0; i < 3; ++i) CHECK(c[i] == doctest::Approx(cubic[i]).epsilon(1e-5));

  const auto quartic = quartic_spectrum(3);
  const auto d = real_det_zeros(make_params(2, 0.0, 2), 0.2, 9.0, 0.2);
  REQUIRE(d.size() >= 3);
  for (int i = 0; i < 3; ++i) CHECK(d[i] == doctest::Approx(quartic[i]).epsilon(1e-5));
}

TEST_CASE("determinants reject the wrong level") {
  CHECK_THROWS_AS(eval_C(1.0, params_from_m(3.5, 2)), DomainError);
  CHECK_THROWS_AS(eval_D(1.0, params_from_m(3.5, 1)), DomainError);
}
