#include "ptspec/ode.hpp"

#include <cmath>
#include <utility>

#include "ptspec/detail/steppers.hpp"
#include "ptspec/errors.hpp"

namespace ptspec {

PathSpec PathSpec::segment(cplx from, cplx to) {
  PathSpec p;
  p.start = from;
  p.length = std::abs(to - from);
  p.direction = p.length > 0 ? (to - from) / p.length : cplx(1.0, 0.0);
  return p;
}

LogValue LinearState::value() const {
  return LogValue::from_log(log_scale) * LogValue::from_complex(u);
}

LogValue LinearState::derivative() const {
  return LogValue::from_log(log_scale) * LogValue::from_complex(du);
}

OdeState wkb_seed(cplx z0, cplx lambda, double m) {
  if (!(m > 0.0) || m == 2.0) throw DomainError("wkb_seed: exponent must be positive and not 2");
  if (z0 == cplx(0.0)) throw SeedError("wkb_seed: z0 = 0");
  const cplx lz = std::log(z0);
  const double r = std::abs(z0);
  if (std::abs(lambda) * std::pow(r, -m) >= 0.1 || std::pow(r, -(m + 2.0) / 2.0) >= 0.1)
    throw SeedError("wkb_seed: starting point is not in the asymptotic regime");
  const cplx zh = std::exp(0.5 * m * lz);
  OdeState s;
  s.log_amp = -0.25 * m * lz - (2.0 / (m + 2.0)) * zh * z0 -
              lambda / (2.0 - m) * std::exp((1.0 - 0.5 * m) * lz);
  s.S = -0.25 * m / z0 - zh - 0.5 * lambda / zh;
  return s;
}

OdeState wkb_seed(cplx z0, cplx lambda, const SpectralParams& p) {
  return wkb_seed(z0, lambda, p.m);
}

namespace {

struct RiccatiRhs {
  const Coefficient& q;
  const PathSpec& path;

  std::pair<cplx, cplx> slope(double t, cplx v) const {
    return {path.direction * (q(path.at(t)) - v * v), -2.0 * path.direction * v};
  }
  cplx lrate(double, cplx v) const { return path.direction * v; }
};

}  // namespace

OdeState integrate(const Coefficient& q, const PathSpec& path, const OdeState& seed,
                   const IntegratorConfig& cfg, IntegrationStats* stats) {
  if (!cfg.allow_outward && std::abs(path.end()) >= std::abs(path.start))
    throw StepFailure("integrate: path must head towards the origin (recessive direction)",
                      std::arg(path.start));
  IntegrationStats local;
  OdeState s = seed;
  RiccatiRhs rhs{q, path};
  const double h0 = cfg.initial_step > 0 ? cfg.initial_step : path.length / 200.0;
  detail::radau_drive(rhs, 0.0, path.length, s.S, s.log_amp, cfg, h0, cfg.pole_guard,
                      std::arg(path.start), local);
  if (stats) *stats += local;
  return s;
}

LinearState integrate_linear(const Coefficient& q, const PathSpec& path,
                             const LinearState& seed, const IntegratorConfig& cfg,
                             IntegrationStats* stats) {
  IntegrationStats local;
  LinearState s = seed;
  // Work in the path parameter: d/dt = direction * d/dz.
  const cplx d = path.direction;
  s.du *= d;
  const cplx d2 = d * d;
  auto qt = [&](double t) { return d2 * q(path.at(t)); };
  const double k_ref =
      std::max({1.0, std::sqrt(std::abs(q(path.start))), std::sqrt(std::abs(q(path.end())))});
  const double h0 = cfg.initial_step > 0 ? cfg.initial_step : path.length / 100.0;
  detail::linear_drive(qt, 0.0, path.length, s, cfg, h0, k_ref, local);
  s.du /= d;
  if (stats) *stats += local;
  return s;
}

}  // namespace ptspec
