#pragma once

// Step drivers shared by the generic integrators and the Sibuya fast path.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>

#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

#include "ptspec/errors.hpp"
#include "ptspec/ode.hpp"

namespace ptspec::detail {

// |re| + |im|: cheap norm for convergence and guard tests.
inline double norm1(std::complex<double> z) { return std::abs(z.real()) + std::abs(z.imag()); }

// PI controller (Gustafsson); `order` is the exponent of the local error.
class StepController {
 public:
  explicit StepController(double order) : alpha_(0.7 / order), beta_(0.4 / order) {}

  double accept_factor(double err) {
    const double e = std::max(err, 1e-10);
    double f = 0.9 * std::pow(e, -alpha_) * std::pow(prev_, beta_);
    prev_ = std::max(e, 1e-4);
    return std::clamp(f, 0.2, 4.0);
  }
  double reject_factor(double err) const {
    return std::clamp(0.9 * std::pow(err, -alpha_ * 1.4), 0.1, 0.5);
  }

 private:
  double alpha_, beta_;
  double prev_ = 1.0;
};

// 3-stage Radau IIA (order 5, L-stable) for a scalar complex Riccati
// equation v' = F(t, v) coupled to the quadrature l' = G(t, v).
struct RadauTableau {
  double c[3];
  double a[3][3];
  RadauTableau() {
    const double s6 = std::sqrt(6.0);
    c[0] = (4.0 - s6) / 10.0;
    c[1] = (4.0 + s6) / 10.0;
    c[2] = 1.0;
    a[0][0] = (88.0 - 7.0 * s6) / 360.0;
    a[0][1] = (296.0 - 169.0 * s6) / 1800.0;
    a[0][2] = (-2.0 + 3.0 * s6) / 225.0;
    a[1][0] = (296.0 + 169.0 * s6) / 1800.0;
    a[1][1] = (88.0 + 7.0 * s6) / 360.0;
    a[1][2] = (-2.0 - 3.0 * s6) / 225.0;
    a[2][0] = (16.0 - s6) / 36.0;
    a[2][1] = (16.0 + s6) / 36.0;
    a[2][2] = 1.0 / 9.0;
  }
};

inline const RadauTableau& radau_tableau() {
  static const RadauTableau tab;
  return tab;
}

// Solves a 3x3 complex system in place (partial pivoting).
inline bool solve3(std::complex<double> m[3][3], std::complex<double> b[3]) {
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (norm1(m[r][col]) > norm1(m[piv][col])) piv = r;
    if (norm1(m[piv][col]) == 0.0) return false;
    if (piv != col) {
      for (int k = 0; k < 3; ++k) std::swap(m[col][k], m[piv][k]);
      std::swap(b[col], b[piv]);
    }
    for (int r = col + 1; r < 3; ++r) {
      const std::complex<double> f = m[r][col] / m[col][col];
      for (int k = col; k < 3; ++k) m[r][k] -= f * m[col][k];
      b[r] -= f * b[col];
    }
  }
  for (int r = 2; r >= 0; --r) {
    for (int k = r + 1; k < 3; ++k) b[r] -= m[r][k] * b[k];
    b[r] /= m[r][r];
  }
  return true;
}

// Rhs must provide
//   std::pair<cplx, cplx> slope(double t, cplx v)  -> (F, dF/dv)
//   cplx lrate(double t, cplx v)                   -> G
template <class Rhs>
bool radau_step(const Rhs& rhs, double t, double h, cplx v, cplx& v_out, cplx& dl_out,
                double guard) {
  const RadauTableau& tab = radau_tableau();
  // Explicit predictor for the stage values.
  const cplx f0 = rhs.slope(t, v).first;
  cplx y[3] = {v + tab.c[0] * h * f0, v + tab.c[1] * h * f0, v + h * f0};
  if (!(norm1(h * f0) < 0.1 * (1.0 + norm1(v)))) y[0] = y[1] = y[2] = v;
  cplx f[3], jac[3];
  double prev_delta = HUGE_VAL;
  bool converged = false;
  for (int iter = 0; iter < 25; ++iter) {
    for (int i = 0; i < 3; ++i) {
      auto [fi, ji] = rhs.slope(t + tab.c[i] * h, y[i]);
      f[i] = fi;
      jac[i] = ji;
    }
    cplx mat[3][3], res[3];
    double scale = 1.0;
    for (int i = 0; i < 3; ++i) {
      cplx acc = y[i] - v;
      for (int j = 0; j < 3; ++j) {
        acc -= h * tab.a[i][j] * f[j];
        mat[i][j] = (i == j ? 1.0 : 0.0) - h * tab.a[i][j] * jac[j];
      }
      res[i] = -acc;
      scale = std::max(scale, norm1(y[i]));
    }
    if (!solve3(mat, res)) return false;
    double delta = 0.0;
    for (int i = 0; i < 3; ++i) {
      y[i] += res[i];
      if (!std::isfinite(y[i].real()) || !std::isfinite(y[i].imag())) return false;
      if (norm1(y[i]) > guard) return false;
      delta = std::max(delta, norm1(res[i]));
    }
    if (delta <= 1e-14 * scale) {
      converged = true;
      break;
    }
    // Stagnation at rounding level counts as converged.
    if (iter > 2 && delta < 1e-11 * scale && delta >= 0.5 * prev_delta) {
      converged = true;
      break;
    }
    if (iter > 4 && delta > prev_delta) return false;
    prev_delta = delta;
  }
  if (!converged) return false;
  v_out = y[2];
  cplx dl = 0.0;
  for (int j = 0; j < 3; ++j) dl += tab.a[2][j] * rhs.lrate(t + tab.c[j] * h, y[j]);
  dl_out = h * dl;
  return true;
}

// Integrates from t0 to t1 (either direction) with step doubling for the
// error estimate and local Richardson extrapolation of the accepted value.
template <class Rhs>
void radau_drive(const Rhs& rhs, double t0, double t1, cplx& v, cplx& l,
                 const IntegratorConfig& cfg, double h_init, double guard,
                 double ray_angle, IntegrationStats& stats) {
  const double span = std::abs(t1 - t0);
  if (span == 0.0) return;
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double h_min = cfg.min_step * std::max(span, 1e-300);
  double h = std::min(h_init > 0 ? h_init : span / 50.0, span);
  double t = t0;
  StepController ctl(6.0);
  long count = 0;
  while (dir * (t1 - t) > 0.0) {
    if (++count > cfg.max_steps)
      throw StepFailure("Riccati integration exceeded max_steps", ray_angle);
    const double remaining = std::abs(t1 - t);
    double hh = std::min(h, remaining);
    if (remaining - hh < 1e-9 * hh) hh = remaining;
    cplx vf, dlf, vh1, dl1, vh, dl2;
    const bool ok = radau_step(rhs, t, dir * hh, v, vf, dlf, guard) &&
                    radau_step(rhs, t, dir * hh / 2, v, vh1, dl1, guard) &&
                    radau_step(rhs, t + dir * hh / 2, dir * hh / 2, vh1, vh, dl2, guard);
    if (!ok) {
      ++stats.rejected;
      h = hh * 0.25;
      if (h < h_min) {
        if (std::abs(v) > 0.1 * guard || std::abs(vh1) > 0.1 * guard)
          throw PoleEncountered("Riccati variable diverged near a zero of w", ray_angle);
        throw StepFailure("Riccati step size underflow", ray_angle);
      }
      continue;
    }
    const cplx dlh = dl1 + dl2;
    const double err_v = std::abs(vh - vf) / 31.0;
    const double err_l = std::abs(dlh - dlf) / 31.0;
    const double norm = std::max(err_v / (cfg.abs_tol + cfg.rel_tol * std::abs(vh)),
                                 err_l / cfg.rel_tol);
    if (norm <= 1.0) {
      v = vh + (vh - vf) / 31.0;
      l += dlh + (dlh - dlf) / 31.0;
      t = (hh == remaining) ? t1 : t + dir * hh;
      ++stats.steps;
      stats.error_estimate += err_l;
      if (std::abs(v) > guard)
        throw PoleEncountered("Riccati variable exceeded the pole guard", ray_angle);
      h = hh * ctl.accept_factor(norm);
    } else {
      ++stats.rejected;
      h = hh * ctl.reject_factor(norm);
      if (h < h_min) throw StepFailure("Riccati step size underflow", ray_angle);
    }
  }
}

struct UnitSpeed {
  double operator()(double) const { return 1.0; }
};

// Linear second-order equation u'' = q(x) u written in a parameter t with
// dx/dt = speed(t); state renormalized after every step so that
// max(|u|, |du/dx|/k_ref) = 1, the scale going into log_scale.
template <class Q, class Speed = UnitSpeed>
void linear_drive(const Q& q, double t0, double t1, LinearState& s,
                  const IntegratorConfig& cfg, double h_init, double k_ref,
                  IntegrationStats& stats, const Speed& speed = Speed{}) {
  using State = std::array<cplx, 2>;
  const double span = std::abs(t1 - t0);
  if (span == 0.0) return;
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double h_min = cfg.min_step * span;
  boost::numeric::odeint::runge_kutta_fehlberg78<State, double, State, double> stepper;
  auto sys = [&q, &speed](const State& x, State& dx, double t) {
    const double v = speed(t);
    dx[0] = v * x[1];
    dx[1] = v * q(t) * x[0];
  };
  auto renormalize = [&](State& x) {
    const double n = std::max(std::abs(x[0]), std::abs(x[1]) / k_ref);
    if (n == 0.0 || !std::isfinite(n)) throw StepFailure("linear integration lost the solution");
    s.log_peak = std::max(s.log_peak, s.log_scale.real() + std::log(std::abs(x[0]) + 1e-300));
    if (std::abs(x[0]) >= 0.25 * n) {
      const cplx c = x[0];
      x[0] = 1.0;
      x[1] /= c;
      s.log_scale += std::log(c);
    } else {
      x[0] /= n;
      x[1] /= n;
      s.log_scale += std::log(n);
    }
  };
  State x{s.u, s.du};
  renormalize(x);
  double h = std::min(h_init > 0 ? h_init : span / 100.0, span);
  double t = t0;
  StepController ctl(8.0);
  long count = 0;
  while (dir * (t1 - t) > 0.0) {
    if (++count > cfg.max_steps) throw StepFailure("linear integration exceeded max_steps");
    const double remaining = std::abs(t1 - t);
    double hh = std::min(h, remaining);
    if (remaining - hh < 1e-9 * hh) hh = remaining;
    State trial = x, err;
    stepper.do_step(sys, trial, t, dir * hh, err);
    const double e = std::max(std::abs(err[0]), std::abs(err[1]) / k_ref) / cfg.rel_tol;
    if (e <= 1.0 && std::isfinite(std::abs(trial[0])) && std::isfinite(std::abs(trial[1]))) {
      x = trial;
      t = (hh == remaining) ? t1 : t + dir * hh;
      ++stats.steps;
      stats.error_estimate += e * cfg.rel_tol;
      renormalize(x);
      h = hh * ctl.accept_factor(e);
    } else {
      ++stats.rejected;
      h = hh * (std::isfinite(e) ? ctl.reject_factor(e) : 0.1);
      if (h < h_min) throw StepFailure("linear step size underflow");
    }
  }
  s.u = x[0];
  s.du = x[1];
  s.log_peak = std::max(s.log_peak, s.log_scale.real() + std::log(std::abs(x[0]) + 1e-300));
}

}  // namespace ptspec::detail
