#include "ptspec/params.hpp"

#include <cmath>
#include <sstream>

#include "ptspec/errors.hpp"

namespace ptspec {

cplx SpectralParams::omega_half_power(int power) const {
  return std::polar(1.0, power * kPi / (m + 2.0));
}

SpectralParams make_params(int M, double eps, int level,
                           bool allow_level_override) {
  if (M < 1) throw DomainError("M must be a positive integer");
  if (level != 1 && level != 2) throw DomainError("level must be 1 or 2");
  if (level != M && !allow_level_override) {
    std::ostringstream os;
    os << "level " << level << " does not match M = " << M
       << " (set the override flag to decouple them)";
    throw DomainError(os.str());
  }
  SpectralParams p;
  p.M = M;
  p.eps = eps;
  p.level = level;
  p.m = 2.0 * M + eps;
  if (!(p.m > 1.0)) {
    std::ostringstream os;
    os << "m = 2M + eps = " << p.m << " must exceed 1";
    throw DomainError(os.str());
  }
  if (p.m == 2.0) {
    throw DomainError("m = 2 is excluded: the normalization divides by 2 - m");
  }
  p.rho = 0.5 + 1.0 / p.m;
  p.omega = std::polar(1.0, 2.0 * kPi / (p.m + 2.0));
  return p;
}

SpectralParams params_from_m(double m, int level) {
  return make_params(level, m - 2.0 * level, level);
}

std::pair<double, double> accumulation_angles(const SpectralParams& p) {
  const double num = (p.level == 1 ? 2.0 : 4.0) - p.m;
  const double theta = kPi * num / (2.0 + p.m);
  return {-theta, theta};
}

double principal_arg(double angle) {
  double a = std::remainder(angle, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

cplx rotate_omega(int power, cplx lambda, const SpectralParams& p) {
  if (lambda == cplx(0.0, 0.0)) {
    throw DomainError("rotation of lambda = 0 has no argument");
  }
  if (power == 0) return lambda;
  const double arg = principal_arg(std::arg(lambda) + power * 2.0 * kPi / (p.m + 2.0));
  return std::polar(std::abs(lambda), arg);
}

cplx rotate_principal(int k, cplx lambda, const SpectralParams& p) {
  return rotate_omega(2 * k, lambda, p);
}

}  // namespace ptspec
