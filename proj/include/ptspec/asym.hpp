#pragma once

#include <functional>
#include <vector>

#include "ptspec/log_value.hpp"
#include "ptspec/params.hpp"

namespace ptspec {

struct AsymConstants {
  double K_m = 0.0;  // growth constant of f on the positive ray
  double c1 = 0.0;   // 1/mu coefficient of F(0, mu)
  double a = 0.0;    // pi / (K_m sin(pi rho))
  double b = 0.0;    // -a / 4
  double rho = 0.0;
};

// m > 1, m != 2.
AsymConstants asym_constants(double m);

// For m > 2: int_0^inf (sqrt(t^m + 1) - t^{m/2}) dt; for 1 < m < 2 the
// integrand also subtracts t^{-m/2}/2. Adaptive quadrature with a series tail.
double compute_Km(double m, double tol = 1e-13);

// (m/32) B(2 - 1/m, 1/2 + 1/m).
double compute_c1(double m);

// Euler's Beta function via log-gamma.
double beta_fn(double a, double b);

// zeta = int_0^z sqrt(t^m + 1) dt along the segment; |arg z| < pi/m.
cplx liouville_phi(cplx z, double m);

// Inverse of liouville_phi on the positive ray.
double liouville_phi_inverse(double zeta, double m);

// g(zeta) = -(5/16) Q'^2/Q^3 + Q''/(4 Q^2) at z = Phi^{-1}(zeta), Q = z^m + 1.
double liouville_g(double zeta, double m);

// int_0^inf g(zeta) d zeta and int_0^inf |g(zeta)| d zeta.
double g_integral(double m);
double g_norm1(double m);

// F(0, mu) for F = 1 + (1/(2 mu)) int_0^inf (1 - exp(-2 mu t)) g(t) F(t) dt,
// by Picard iteration. Throws NotContractive unless ||g||_1 / (2 mu) < 0.5.
double picard_F0(double mu, double m, int max_iter = 80);

struct PsiFit {
  std::vector<double> int_coeffs;  // c_1 .. c_k of mu^{-1} .. mu^{-k}
  double nonint_exponent = 0.0;
  double nonint_coeff = 0.0;
  double fit_residual = 0.0;  // rms of the weighted residual
  bool log_term = false;      // the extra term was mu^{-s} log mu (integer s within the basis)
};

// Least-squares fit of F(0, mu) - 1 by sum_k c_k mu^{-k} (k <= n_int) plus
// C mu^{-s}, with s scanned over [s_lo, s_hi] then refined by golden section.
// With s_lo >= s_hi the exponent is held fixed at s_lo. An integer s within
// the basis uses mu^{-s} log mu in place of mu^{-s}.
PsiFit psi_fit(const std::vector<double>& mu, const std::vector<double>& F0, int n_int,
               double s_lo, double s_hi);

// [int_0^inf e^{-mu t} g(t) dt] / [(1/4) m (m-1) Gamma(m-1) mu^{1-m}].
double watson_check(double mu, double m);

// h_f(theta) = K_m cos(rho theta).
double indicator_theoretical(double theta, const SpectralParams& p);

// Indicator of the numerator of C (level 1) or D (level 2): max over its
// terms of the indicators of the rotated copies of f.
double indicator_piecewise_numerator(double theta, const SpectralParams& p);

// Least-squares slope of log|func(r e^{i theta})| against r^rho.
double indicator_estimate(const std::function<LogValue(cplx)>& func, double theta,
                          const std::vector<double>& radii, double rho);

// Predicted n-th zero of f (a negative number): -lambda_n = (a n)^{1/rho} + (b/rho)(a n)^{1/rho - 1}.
double asr_root(int n, const SpectralParams& p);

}  // namespace ptspec
