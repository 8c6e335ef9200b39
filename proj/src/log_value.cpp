#include "ptspec/log_value.hpp"

#include <algorithm>

#include "ptspec/errors.hpp"
#include "ptspec/params.hpp"

namespace ptspec {

namespace {
constexpr double kMaxLog = 700.0;
}

LogValue LogValue::from_complex(std::complex<double> z) {
  if (z == std::complex<double>(0.0, 0.0)) return {};
  return {std::log(std::abs(z)), std::arg(z)};
}

std::complex<double> LogValue::to_complex() const {
  if (is_zero()) return {0.0, 0.0};
  if (!(std::abs(logmod) < kMaxLog)) {
    throw RangeError("LogValue modulus exp(" + std::to_string(logmod) +
                     ") outside double range");
  }
  return std::polar(std::exp(logmod), phase);
}

std::complex<double> LogValue::to_complex_unchecked() const {
  if (is_zero()) return {0.0, 0.0};
  return std::polar(std::exp(logmod), phase);
}

LogValue LogValue::operator-() const { return {logmod, phase + kPi}; }

LogValue operator*(const LogValue& a, const LogValue& b) {
  if (a.is_zero() || b.is_zero()) return {};
  return {a.logmod + b.logmod, a.phase + b.phase};
}

LogValue operator/(const LogValue& a, const LogValue& b) {
  if (a.is_zero()) return {};
  return {a.logmod - b.logmod, a.phase - b.phase};
}

LogValue operator+(const LogValue& a, const LogValue& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  const LogValue& big = a.logmod >= b.logmod ? a : b;
  const LogValue& small = a.logmod >= b.logmod ? b : a;
  const std::complex<double> w =
      1.0 + std::polar(std::exp(small.logmod - big.logmod), small.phase - big.phase);
  if (w == std::complex<double>(0.0, 0.0)) return {};
  return {big.logmod + std::log(std::abs(w)), big.phase + std::arg(w)};
}

LogValue operator-(const LogValue& a, const LogValue& b) { return a + (-b); }

LogValue scale(const LogValue& a, std::complex<double> c) {
  return a * LogValue::from_complex(c);
}

std::complex<double> ratio(const LogValue& a, const LogValue& b) {
  return (a / b).to_complex();
}

double phase_step(const LogValue& a, const LogValue& b) {
  return principal_arg(b.phase - a.phase);
}

}  // namespace ptspec
