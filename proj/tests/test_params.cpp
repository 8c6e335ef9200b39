#include <doctest.h>

#include <cmath>

#include "ptspec/errors.hpp"
#include "ptspec/params.hpp"

using namespace ptspec;

TEST_CASE("make_params derives m, rho, omega") {
  auto p = make_params(1, 1.0, 1);
  CHECK(p.m == doctest::Approx(3.0));
  CHECK(p.rho == doctest::Approx(5.0 / 6.0));
  CHECK(std::abs(p.omega - std::polar(1.0, 2 * kPi / 5)) < 1e-15);
  CHECK(std::abs(std::pow(p.omega, p.m + 2) - 1.0) < 1e-13);

  auto q = make_params(1, -0.5, 1);
  CHECK(q.m == doctest::Approx(1.5));
  CHECK(q.rho == doctest::Approx(7.0 / 6.0));
}

TEST_CASE("make_params rejects the excluded exponents") {
  CHECK_THROWS_AS(make_params(1, -1.5, 1), DomainError);
  CHECK_THROWS_AS(make_params(1, 0.0, 1), DomainError);
  CHECK_THROWS_AS(make_params(1, -1.0, 1), DomainError);
  CHECK_THROWS_AS(make_params(1, 0.5, 3), DomainError);
  CHECK_THROWS_AS(make_params(2, 0.0, 1), DomainError);
  CHECK_NOTHROW(make_params(2, 0.0, 1, true));
}

TEST_CASE("accumulation angles") {
  auto a = accumulation_angles(make_params(1, -0.5, 1));
  CHECK(a.second == doctest::Approx(kPi / 7));
  CHECK(a.first == doctest::Approx(-kPi / 7));
  auto b = accumulation_angles(make_params(2, -1.0, 2));
  CHECK(b.second == doctest::Approx(kPi / 5));
  CHECK(b.first == -b.second);
  // Degenerate m = 2 value from the formula.
  auto c = accumulation_angles(make_params(2, -2.0 + 1e-12, 1, true));
  CHECK(std::abs(c.second) < 1e-11);
}

TEST_CASE("rotate_principal branch bookkeeping") {
  auto p = make_params(1, -0.5, 1);
  CHECK(std::arg(rotate_principal(1, 1.0, p)) == doctest::Approx(-6 * kPi / 7));
  CHECK(std::arg(rotate_principal(-1, 1.0, p)) == doctest::Approx(6 * kPi / 7));
  const cplx l(2.0, 0.7);
  CHECK(rotate_principal(0, l, p) == l);
  CHECK_THROWS_AS(rotate_principal(1, 0.0, p), DomainError);

  for (double th = -3.0; th <= 3.0; th += 0.37) {
    const cplx z = std::polar(1.7, th);
    for (int k = -2; k <= 2; ++k) {
      const cplx a = rotate_principal(k, std::conj(z), p);
      const cplx b = std::conj(rotate_principal(-k, z, p));
      CHECK(std::abs(a - b) < 1e-13);
      CHECK(std::arg(a) > -kPi);
      CHECK(std::arg(a) <= kPi);
    }
  }
}

TEST_CASE("omega rotations close after m+2 steps for integer m") {
  auto p = make_params(1, 1.0, 1);
  cplx z(0.3, 1.1);
  cplx w = z;
  for (int i = 0; i < 5; ++i) w = rotate_omega(1, w, p);
  CHECK(std::abs(w - z) < 1e-13);
}
