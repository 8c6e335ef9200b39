#include <doctest.h>

#include <boost/math/special_functions/airy.hpp>
#include <cmath>

#include "ptspec/errors.hpp"
#include "ptspec/ode.hpp"

using namespace ptspec;

namespace {

const Coefficient kAiry = [](cplx z) { return z; };

double airy_ratio_oracle() {
  return -std::cbrt(3.0) * std::tgamma(2.0 / 3.0) / std::tgamma(1.0 / 3.0);
}

}  // namespace

TEST_CASE("wkb_seed formula and preconditions") {
  const auto s = wkb_seed(10.0, 0.0, make_params(1, 1.0, 1));
  CHECK(s.log_amp.real() ==
        doctest::Approx(-0.75 * std::log(10.0) - 0.4 * std::pow(10.0, 2.5)).epsilon(1e-14));
  CHECK(std::abs(s.log_amp.imag()) < 1e-14);

  const auto t = wkb_seed(100.0, 1.0, 1.5);
  const double expect = -0.375 * std::log(100.0) - (2.0 / 3.5) * std::pow(100.0, 1.75) -
                        2.0 * std::pow(100.0, 0.25);
  CHECK(t.log_amp.real() == doctest::Approx(expect).epsilon(1e-14));

  CHECK_THROWS_AS(wkb_seed(0.5, 0.0, 3.0), SeedError);
  CHECK_THROWS_AS(wkb_seed(3.0, 50.0, 3.0), SeedError);
}

TEST_CASE("constant coefficient: exact exponential") {
  IntegratorConfig cfg;
  OdeState seed{cplx(-10.0, 0.0), cplx(-1.0, 0.0)};
  const auto end = integrate([](cplx) { return cplx(1.0); }, PathSpec::segment(10.0, 0.0), seed, cfg);
  CHECK(std::abs(end.S + 1.0) < 10 * cfg.rel_tol);
  CHECK(std::abs(end.log_amp) < 10 * cfg.rel_tol);
}

TEST_CASE("Airy logarithmic derivative at the origin") {
  IntegratorConfig cfg;
  const auto seed = wkb_seed(20.0, 0.0, 1.0);
  const auto end = integrate(kAiry, PathSpec::segment(20.0, 0.0), seed, cfg);
  CHECK(std::abs(end.S - airy_ratio_oracle()) < 1e-6);
  const double boost_ratio = boost::math::airy_ai_prime(0.0) / boost::math::airy_ai(0.0);
  CHECK(std::abs(end.S.real() - boost_ratio) < 1e-6);
  // The seed is 2 sqrt(pi) Ai (1 - 5/(72 zeta))^{-1} up to O(zeta^-2).
  const double zeta = (2.0 / 3.0) * std::pow(20.0, 1.5);
  const double log_ai0 = std::log(boost::math::airy_ai(0.0) * 2 * std::sqrt(M_PI)) -
                         std::log1p(-5.0 / (72.0 * zeta));
  CHECK(std::abs(end.log_amp.real() - log_ai0) < 1e-5);
}

TEST_CASE("outward integration is rejected") {
  IntegratorConfig cfg;
  OdeState dominant{cplx(0.0), cplx(1.0)};
  CHECK_THROWS_AS(integrate(kAiry, PathSpec::segment(0.0, 20.0), dominant, cfg), StepFailure);
}

TEST_CASE("tolerance halving stays within the error estimate") {
  const Coefficient q = [](cplx z) { return std::pow(z, 3.0) + 2.0; };
  const auto path = PathSpec::segment(std::polar(12.0, 0.2), 0.0);
  const auto seed = wkb_seed(path.start, 2.0, 3.0);
  IntegratorConfig a, b;
  a.rel_tol = 1e-9;
  b.rel_tol = 0.5e-9;
  IntegrationStats sa;
  const auto ea = integrate(q, path, seed, a, &sa);
  const auto eb = integrate(q, path, seed, b);
  CHECK(std::abs(ea.log_amp - eb.log_amp) <= std::max(sa.error_estimate, 1e-12));
}

TEST_CASE("conjugate path gives the conjugate state") {
  const Coefficient q = [](cplx z) { return std::pow(z, 2.5) + 1.0; };
  const auto up = PathSpec::segment(std::polar(12.0, 0.3), 0.0);
  const auto dn = PathSpec::segment(std::polar(12.0, -0.3), 0.0);
  IntegratorConfig cfg;
  const auto e1 = integrate(q, up, wkb_seed(up.start, 1.0, 2.5), cfg);
  const auto e2 = integrate(q, dn, wkb_seed(dn.start, 1.0, 2.5), cfg);
  CHECK(std::abs(e1.S - std::conj(e2.S)) < 1e-9 * std::abs(e1.S));
  CHECK(std::abs(e1.log_amp - std::conj(e2.log_amp)) < 1e-9);
}

TEST_CASE("splitting a path does not change the endpoint") {
  const Coefficient q = [](cplx z) { return std::pow(z, 3.0) + 1.0; };
  const cplx a = std::polar(12.0, 0.1), mid = std::polar(4.0, 0.1);
  IntegratorConfig cfg;
  IntegrationStats st;
  const auto seed = wkb_seed(a, 1.0, 3.0);
  const auto whole = integrate(q, PathSpec::segment(a, 0.0), seed, cfg, &st);
  const auto half = integrate(q, PathSpec::segment(a, mid), seed, cfg, &st);
  const auto rest = integrate(q, PathSpec::segment(mid, 0.0), half, cfg, &st);
  CHECK(std::abs(whole.log_amp - rest.log_amp) < 5 * std::max(st.error_estimate, 1e-11));
}

TEST_CASE("linear form passes through zeros of the solution") {
  IntegratorConfig cfg;
  LinearState s;
  s.u = boost::math::airy_ai(0.0);
  s.du = boost::math::airy_ai_prime(0.0);
  const auto end = integrate_linear(kAiry, PathSpec::segment(0.0, -8.0), s, cfg);
  const cplx v = end.value().to_complex();
  const cplx d = end.derivative().to_complex();
  CHECK(std::abs(v - boost::math::airy_ai(-8.0)) < 1e-9);
  CHECK(std::abs(d - boost::math::airy_ai_prime(-8.0)) < 1e-8);
}
