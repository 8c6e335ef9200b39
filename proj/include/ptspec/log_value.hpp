#pragma once

#include <cmath>
#include <complex>
#include <limits>

namespace ptspec {

// exp(logmod + i*phase). Magnitudes far outside double range stay finite.
// Zero is logmod = -inf.
struct LogValue {
  double logmod = -std::numeric_limits<double>::infinity();
  double phase = 0.0;

  LogValue() = default;
  LogValue(double lm, double ph) : logmod(lm), phase(ph) {}

  static LogValue from_complex(std::complex<double> z);
  // From a complex logarithm, keeping the imaginary part unreduced.
  static LogValue from_log(std::complex<double> log_z) {
    return {log_z.real(), log_z.imag()};
  }
  static LogValue one() { return {0.0, 0.0}; }
  static LogValue unit(double phase) { return {0.0, phase}; }

  bool is_zero() const { return std::isinf(logmod) && logmod < 0; }
  bool finite() const { return std::isfinite(logmod) && std::isfinite(phase); }

  // Throws RangeError when |logmod| >= 700.
  std::complex<double> to_complex() const;
  // Unchecked; overflows to inf / underflows to 0.
  std::complex<double> to_complex_unchecked() const;

  std::complex<double> log() const { return {logmod, phase}; }
  LogValue conj() const { return {logmod, -phase}; }
  LogValue operator-() const;
};

LogValue operator*(const LogValue& a, const LogValue& b);
LogValue operator/(const LogValue& a, const LogValue& b);
LogValue operator+(const LogValue& a, const LogValue& b);
LogValue operator-(const LogValue& a, const LogValue& b);
LogValue scale(const LogValue& a, std::complex<double> c);

// a/b as a complex number; the ratio itself must fit a double.
std::complex<double> ratio(const LogValue& a, const LogValue& b);

// Phase difference b - a reduced to (-pi, pi].
double phase_step(const LogValue& a, const LogValue& b);

}  // namespace ptspec
