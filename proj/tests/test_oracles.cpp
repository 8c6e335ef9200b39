#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "ptspec/oracles.hpp"

using namespace ptspec;

TEST_CASE("cubic PT spectrum is stable under basis doubling") {
  const auto a = cubic_pt_spectrum(200, 2.5);
  const auto b = cubic_pt_spectrum(400, 2.5);
  REQUIRE(a.size() >= 3);
  REQUIRE(b.size() >= 3);
  for (int i = 0; i < 3; ++i) {
    CAPTURE(i);
    CHECK(std::abs(a[i] - b[i]) < 1e-6 * std::abs(b[i]));
    CHECK(std::abs(a[i].imag()) < 1e-6 * (1 + std::abs(a[i])));
  }
  CHECK(a[0].real() == doctest::Approx(1.15627).epsilon(1e-5));
  CHECK(a[1].real() == doctest::Approx(4.10923).epsilon(1e-5));
  CHECK(a[2].real() == doctest::Approx(7.56227).epsilon(1e-5));
}

TEST_CASE("cubic spectrum does not depend on the basis frequency") {
  const auto a = cubic_pt_spectrum(300, 2.0);
  const auto b = cubic_pt_spectrum(300, 3.0);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(a[i] - b[i]) < 1e-6 * std::abs(b[i]));
}

TEST_CASE("quartic spectrum from shooting") {
  const auto e = quartic_spectrum(3);
  REQUIRE(e.size() == 3);
  CHECK(e[0] == doctest::Approx(1.06036).epsilon(1e-5));
  CHECK(e[1] == doctest::Approx(3.79967).epsilon(1e-5));
  CHECK(e[2] == doctest::Approx(7.45570).epsilon(1e-5));
  const auto coarse = quartic_spectrum(3, 2e-3);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(coarse[i] - e[i]) < 1e-7 * e[i]);
}

TEST_CASE("quartic spectrum against the diagonalised oscillator basis") {
  // x = (a + a^dag) / sqrt(2w) and p^2 = w (2N + 1) - w^2 x^2 in the oscillator basis.
  const int n = 160, pad = 4;
  const double w = 3.0;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n + pad, n + pad);
  for (int i = 0; i + 1 < n + pad; ++i) x(i, i + 1) = x(i + 1, i) = std::sqrt((i + 1) / (2.0 * w));
  const Eigen::MatrixXd x2 = (x * x).topLeftCorner(n, n);
  const Eigen::MatrixXd x4 = (x * x * x * x).topLeftCorner(n, n);
  Eigen::MatrixXd h = x4 - w * w * x2;
  for (int i = 0; i < n; ++i) h(i, i) += w * (2 * i + 1);
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues();
  const auto e = quartic_spectrum(3);
  for (int i = 0; i < 3; ++i) CHECK(ev(i) == doctest::Approx(e[i]).epsilon(1e-7));
}
