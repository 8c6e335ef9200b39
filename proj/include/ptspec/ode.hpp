#pragma once

#include <cmath>
#include <complex>
#include <functional>

#include "ptspec/log_value.hpp"
#include "ptspec/params.hpp"

namespace ptspec {

// Directed segment z(t) = start + t * direction, t in [0, length].
struct PathSpec {
  cplx start;
  cplx direction{1.0, 0.0};
  double length = 0.0;

  static PathSpec segment(cplx from, cplx to);
  cplx at(double t) const { return start + t * direction; }
  cplx end() const { return at(length); }
};

struct IntegratorConfig {
  double rel_tol = 1e-11;
  double abs_tol = 1e-13;
  double initial_step = 0.0;  // 0: chosen from the path scale
  double min_step = 1e-13;    // relative to the path length
  long max_steps = 1'000'000;
  double pole_guard = 1e8;
  bool allow_outward = false;  // only for round-trip checks
};

// log w and S = w'/w of one solution of w'' = q(z) w.
struct OdeState {
  cplx log_amp;
  cplx S;

  LogValue value() const { return LogValue::from_log(log_amp); }
};

// w = exp(log_scale) * u, w' = exp(log_scale) * du. Used where w has zeros.
struct LinearState {
  cplx log_scale{0.0, 0.0};
  cplx u{1.0, 0.0};
  cplx du{0.0, 0.0};
  double log_peak = -HUGE_VAL;  // max log|w| seen at step boundaries

  LogValue value() const;
  LogValue derivative() const;
};

struct IntegrationStats {
  long steps = 0;
  long rejected = 0;
  double error_estimate = 0.0;  // accumulated |local error| in log w

  IntegrationStats& operator+=(const IntegrationStats& o) {
    steps += o.steps;
    rejected += o.rejected;
    error_estimate += o.error_estimate;
    return *this;
  }
};

using Coefficient = std::function<cplx(cplx)>;

// Recessive solution of y'' = (z^m + lambda) y at z0, from the leading
// asymptotics: log y = -(m/4) log z - 2/(m+2) z^{(m+2)/2} - lambda/(2-m) z^{(2-m)/2}.
// Throws SeedError unless |lambda| |z0|^-m < 0.1 and |z0|^{-(m+2)/2} < 0.1.
// The m overload accepts any m > 0 except 2 (m = 1 gives the Airy equation).
OdeState wkb_seed(cplx z0, cplx lambda, double m);
OdeState wkb_seed(cplx z0, cplx lambda, const SpectralParams& p);

// Integrates S' = q - S^2, (log w)' = S along the path with an L-stable
// implicit Runge-Kutta method. The path must head towards the origin
// (|end| < |start|) unless cfg.allow_outward; otherwise StepFailure.
// Throws PoleEncountered when |S| exceeds cfg.pole_guard.
OdeState integrate(const Coefficient& q, const PathSpec& path, const OdeState& seed,
                   const IntegratorConfig& cfg, IntegrationStats* stats = nullptr);

// Integrates the linear form w'' = q w with running renormalization.
// Direction is unrestricted; passing through zeros of w is harmless.
LinearState integrate_linear(const Coefficient& q, const PathSpec& path,
                             const LinearState& seed, const IntegratorConfig& cfg,
                             IntegrationStats* stats = nullptr);

}  // namespace ptspec
