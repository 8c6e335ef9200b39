#include "ptspec/oracles.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>

#include "ptspec/errors.hpp"
#include "ptspec/params.hpp"

namespace ptspec {

std::vector<std::complex<double>> cubic_pt_spectrum(int basis_size, double freq, bool real_only) {
  using Mat = Eigen::MatrixXcd;
  const int pad = basis_size + 4;
  // Ladder operator a in the number basis; x = (a + a^+)/sqrt(2w), p = i sqrt(w/2)(a^+ - a).
  Mat a = Mat::Zero(pad, pad);
  for (int n = 1; n < pad; ++n) a(n - 1, n) = std::sqrt(double(n));
  const Mat ad = a.adjoint();
  const Mat x = (a + ad) / std::sqrt(2.0 * freq);
  const Mat p = std::complex<double>(0.0, std::sqrt(freq / 2.0)) * (ad - a);
  const Mat h_full = p * p + std::complex<double>(0.0, 1.0) * x * x * x;
  const Mat h = h_full.topLeftCorner(basis_size, basis_size);
  Eigen::ComplexEigenSolver<Mat> es(h, false);
  if (es.info() != Eigen::Success) throw Error("cubic oracle: eigensolver failed");
  std::vector<std::complex<double>> ev;
  for (int i = 0; i < basis_size; ++i) {
    const auto e = es.eigenvalues()(i);
    if (!real_only || std::abs(e.imag()) < 1e-6 * (1.0 + std::abs(e))) ev.push_back(e);
  }
  std::sort(ev.begin(), ev.end(), [](auto l, auto r) { return l.real() < r.real(); });
  return ev;
}

namespace {

// Numerov for w'' = (x^4 - E) w on [0, L]; returns w(L) for the even
// (w(0)=1, w'(0)=0) or odd (w(0)=0, w'(0)=1) start.
double numerov_end(double e, bool even, double h, double length) {
  const int n = static_cast<int>(std::lround(length / h));
  auto k = [e](double x) { return x * x * x * x - e; };
  double w0, w1;
  // Taylor start to O(h^6).
  if (even) {
    w0 = 1.0;
    w1 = 1.0 - e * h * h / 2.0 + e * e * h * h * h * h / 24.0 +
         (h * h * h * h * h * h) * (2.0 * 12.0 / 720.0 - e * e * e / 720.0);
  } else {
    w0 = 0.0;
    w1 = h - e * h * h * h / 6.0 + e * e * std::pow(h, 5) / 120.0;
  }
  const double c = h * h / 12.0;
  for (int i = 1; i < n; ++i) {
    const double xm = (i - 1) * h, x0 = i * h, xp = (i + 1) * h;
    const double w2 = (2.0 * w1 * (1.0 + 5.0 * c * k(x0)) - w0 * (1.0 - c * k(xm))) /
                      (1.0 - c * k(xp));
    w0 = w1;
    w1 = w2;
    if (std::abs(w1) > 1e200) {
      w0 *= 1e-200;
      w1 *= 1e-200;
    }
  }
  return w1;
}

double shoot(int level, double h) {
  // level-th eigenvalue: parity alternates, bracket from a WKB estimate.
  const bool even = level % 2 == 0;
  const double length = 6.0;
  // Bohr-Sommerfeld estimate: E^{3/4} * 2 int_0^1 sqrt(1 - t^4) dt = (n + 1/2) pi.
  const double action = 2.0 * std::tgamma(0.25) * std::tgamma(1.5) / (4.0 * std::tgamma(1.75));
  const double wkb = std::pow((level + 0.5) * kPi / action, 4.0 / 3.0);
  auto fn = [&](double e) { return numerov_end(e, even, h, length); };
  double lo = std::max(0.1, wkb * 0.7), hi = wkb * 1.3 + 0.5;
  // Walk to a sign change closest to the estimate.
  const int n_scan = 400;
  double prev_e = lo, prev_v = fn(lo);
  double best = -1.0, best_lo = 0, best_hi = 0;
  for (int i = 1; i <= n_scan; ++i) {
    const double e = lo + (hi - lo) * i / n_scan;
    const double v = fn(e);
    if ((v > 0) != (prev_v > 0)) {
      const double d = std::abs(0.5 * (e + prev_e) - wkb);
      if (best < 0 || d < best) {
        best = d;
        best_lo = prev_e;
        best_hi = e;
      }
    }
    prev_e = e;
    prev_v = v;
  }
  if (best < 0) throw Error("quartic oracle: no bracket");
  boost::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(
      fn, best_lo, best_hi, boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (r.first + r.second);
}

}  // namespace

std::vector<double> quartic_spectrum(int count, double step) {
  std::vector<double> out;
  for (int n = 0; n < count; ++n) {
    const double e1 = shoot(n, step), e2 = shoot(n, step / 2);
    out.push_back((16.0 * e2 - e1) / 15.0);
  }
  return out;
}

}  // namespace ptspec
