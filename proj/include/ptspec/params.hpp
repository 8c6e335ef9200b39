#pragma once

#include <complex>
#include <utility>

namespace ptspec {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Constants of the problem -w'' + x^{2M}(ix)^eps w = E w.
// Built only through make_params / params_from_m, immutable afterwards.
struct SpectralParams {
  int M = 1;
  double eps = 0.0;
  int level = 1;
  double m = 2.0;    // 2M + eps
  double rho = 1.0;  // 1/2 + 1/m, order of the Sibuya function
  cplx omega;        // exp(2 pi i / (m + 2))

  // exp(i * power * pi / (m + 2)), i.e. omega^{power/2} on the principal sheet.
  cplx omega_half_power(int power) const;
};

// Throws DomainError for m <= 1, m == 2, level outside {1, 2}, or level != M
// unless allow_level_override is set.
SpectralParams make_params(int M, double eps, int level,
                           bool allow_level_override = false);

// Convenience for studies of f alone: M = level, eps = m - 2 * level.
SpectralParams params_from_m(double m, int level = 1);

// Limit arguments (-theta, +theta) of the non-real eigenvalues.
std::pair<double, double> accumulation_angles(const SpectralParams& p);

// Reduce an angle to (-pi, pi].
double principal_arg(double angle);

// omega^power * lambda with the argument reduced to (-pi, pi].
// The returned number carries |lambda| and the reduced angle exactly.
cplx rotate_omega(int power, cplx lambda, const SpectralParams& p);

// omega^{2k} * lambda, principal argument. Throws DomainError for lambda = 0.
cplx rotate_principal(int k, cplx lambda, const SpectralParams& p);

}  // namespace ptspec
