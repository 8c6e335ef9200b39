#pragma once

#include <vector>

#include "ptspec/log_value.hpp"
#include "ptspec/ode.hpp"
#include "ptspec/params.hpp"

namespace ptspec {

enum DetFlag : unsigned {
  kDetOk = 0,
  kDivisionNearZero = 1u << 0,  // |denominator| < 1e-12 of the largest term, or its relative error > 1e-6
  kCancellation = 1u << 1,      // numerator more than 30 log units below its largest term
};

struct DetValue {
  LogValue value;
  LogValue numerator;
  LogValue denominator;
  std::vector<LogValue> terms;  // 2 summands (level 1) or 3 (level 2)
  unsigned flags = kDetOk;
  double est_error = 0.0;  // relative error of value
};

// C = (omega^{1/2} f(omega^2 l) + omega^{-1/2} f(omega^{-2} l)) / f(l).
DetValue eval_C(cplx lambda, const SpectralParams& p, const IntegratorConfig& cfg = {});
LogValue eval_numerator_C(cplx lambda, const SpectralParams& p, const IntegratorConfig& cfg = {});

// D = [omega f(omega l) f(omega^3 l) + omega^{-1} f(omega^{-1} l) f(omega^{-3} l)
//      + f(omega^3 l) f(omega^{-3} l)] / [f(omega l) f(omega^{-1} l)].
DetValue eval_D(cplx lambda, const SpectralParams& p, const IntegratorConfig& cfg = {});
LogValue eval_numerator_D(cplx lambda, const SpectralParams& p, const IntegratorConfig& cfg = {});

// C for level 1 params, D for level 2.
DetValue eval_det(cplx lambda, const SpectralParams& p, const IntegratorConfig& cfg = {});

// lambda = sign * E.
struct EigenMap {
  int sign = 0;
  bool calibrated = false;
  double match_error = 0.0;  // max relative error on the calibration eigenvalues

  cplx lambda_of_E(cplx e) const;
  cplx E_of_lambda(cplx lambda) const;
};

// Real zeros of the determinant of `p` on [lo, hi] (sign changes plus bracketing refinement).
std::vector<double> real_det_zeros(const SpectralParams& p, double lo, double hi, double step,
                                   const IntegratorConfig& cfg = {});

// Compares determinant zeros of the integer calibration case for p.M (M = 1:
// eps = 1 against the cubic oracle, M = 2: eps = 0 against the quartic oracle)
// under both sign conventions. Throws CalibrationAmbiguous unless exactly one
// matches the first three eigenvalues to 1e-3 relative; DomainError for M > 2.
EigenMap calibrate_sign(const SpectralParams& p, const IntegratorConfig& cfg = {});

// Cached calibration per M (computed once, thread-safe).
const EigenMap& calibrated_map(int M, const IntegratorConfig& cfg = {});

}  // namespace ptspec
