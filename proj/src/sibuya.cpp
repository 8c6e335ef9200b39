#include "ptspec/sibuya.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include "ptspec/detail/steppers.hpp"
#include "ptspec/errors.hpp"

namespace ptspec {

namespace {

constexpr double kSeedPhase = 1e6;  // |z|^{(m+2)/2} scale at the seed point
constexpr int kCandidates = 13;

struct Radii {
  double inner;  // switch from Riccati to linear form
  double outer;  // seed point
};

Radii radii_for(cplx lambda, double m) {
  const double l = std::abs(lambda);
  Radii r;
  r.inner = std::max(1.0, 1.5 * std::pow(l, 1.0 / m));
  r.outer = std::max({4.0 * r.inner, std::pow(100.0 * l, 1.0 / m),
                      std::pow(kSeedPhase * (m + 2.0) / 2.0, 2.0 / (m + 2.0))});
  return r;
}

// Generalized binomial coefficients binom(a, k), k = 0..n-1.
template <std::size_t N>
std::array<double, N> binomials(double a) {
  std::array<double, N> c{};
  c[0] = 1.0;
  for (std::size_t k = 1; k < N; ++k) c[k] = c[k - 1] * (a - double(k - 1)) / double(k);
  return c;
}

// Powers of z = r e^{i phi} on the ray, avoiding complex pow.
struct RayPowers {
  double m, phi;
  cplx e_half;  // e^{i m phi / 2}
  cplx e_phi;   // e^{i phi}

  RayPowers(double m_, double phi_)
      : m(m_), phi(phi_), e_half(std::polar(1.0, 0.5 * m_ * phi_)), e_phi(std::polar(1.0, phi_)) {}

  cplx pow(double r, double a) const { return std::polar(std::pow(r, a), a * phi); }
};

// Seed of the shifted Riccati variable V = S + p and Lt = log y + A_ref at z,
// from the two-term Liouville-Green expansion with exact binomial series.
std::pair<cplx, cplx> refined_seed(double r, const RayPowers& rp, cplx lambda) {
  const double m = rp.m;
  const cplx z = std::polar(r, rp.phi);
  const cplx logz(std::log(r), rp.phi);
  const cplx zm = rp.pow(r, m);
  const cplx w = lambda / zm;
  const cplx zh = rp.pow(r, 0.5 * m);

  constexpr std::size_t N = 64;
  static thread_local double cached_m = -1.0;
  static thread_local std::array<double, N> b_half, b_m52, b_m32;
  if (cached_m != m) {
    b_half = binomials<N>(0.5);
    b_m52 = binomials<N>(-2.5);
    b_m32 = binomials<N>(-1.5);
    cached_m = m;
  }

  // A - A_ref and sqrt(Q) - p.
  cplx a_tail = 0.0, sq_tail = 0.0, eps1 = 0.0;
  cplx wk = w;  // w^k
  const cplx zfac_a = zh * z;                 // z^{m/2+1}
  const cplx zfac_e = 1.0 / (zh * z);         // z^{-m/2-1}
  const double c5 = -(5.0 / 16.0) * m * m, c3 = m * (m - 1.0) / 4.0;
  for (std::size_t k = 1; k < N; ++k) {
    if (k >= 2) {
      const cplx ta = b_half[k] * wk * zfac_a / (double(k) * m - 0.5 * m - 1.0);
      a_tail -= ta;
      sq_tail += b_half[k] * wk * zh;
    }
    const cplx te = (c5 * b_m52[k] + c3 * b_m32[k]) * wk * zfac_e / (0.5 * m + 1.0 + double(k) * m);
    eps1 += 0.5 * te;
    if (k > 3 && std::abs(wk) < 1e-19) break;
    wk *= w;
  }
  eps1 += 0.5 * (c5 + c3) * zfac_e / (0.5 * m + 1.0);

  const cplx opw = 1.0 + w;
  const cplx g = zfac_e / z * (c5 * std::pow(opw, -2.5) + c3 * std::pow(opw, -1.5));
  const cplx lt = -0.25 * (m * logz + std::log(1.0 + w)) - a_tail + eps1;
  const cplx dq_over_4q = 0.25 * m / (z * opw);
  const cplx v = -dq_over_4q - sq_tail - 0.5 * g;
  return {v, lt};
}

// Right-hand side of V' = p' - (lambda^2/4) z^{-m} + 2 p V - V^2 in the ray
// parameter r (dz = e^{i phi} dr), and Lt' = V.
struct ShiftedRiccati {
  const RayPowers& rp;
  cplx lambda;

  std::pair<cplx, cplx> slope(double r, cplx v) const {
    const double m = rp.m;
    const double a = std::pow(r, 0.5 * m);
    const cplx zh = a * rp.e_half;                  // z^{m/2}
    const cplx zmh = std::conj(rp.e_half) / a;      // z^{-m/2}
    const cplx inv_z = std::conj(rp.e_phi) / r;
    const cplx p = zh + 0.5 * lambda * zmh;
    const cplx dp = (0.5 * m * zh - 0.25 * m * lambda * zmh) * inv_z;
    const cplx f = dp - 0.25 * lambda * lambda * zmh * zmh + 2.0 * p * v - v * v;
    return {rp.e_phi * f, rp.e_phi * (2.0 * p - 2.0 * v)};
  }
  cplx lrate(double, cplx v) const { return rp.e_phi * v; }
};

cplx a_ref(double r, const RayPowers& rp, cplx lambda) {
  const double m = rp.m;
  return (2.0 / (m + 2.0)) * rp.pow(r, 0.5 * m + 1.0) +
         lambda / (2.0 - m) * rp.pow(r, 1.0 - 0.5 * m);
}

cplx p_of(double r, const RayPowers& rp, cplx lambda) {
  const double a = std::pow(r, 0.5 * rp.m);
  return a * rp.e_half + 0.5 * lambda * std::conj(rp.e_half) / a;
}

}  // namespace

double max_ray_angle(const SpectralParams& p) { return kPi / (p.m + 2.0) - 0.05; }

double ray_amplification(cplx lambda, double phi, const SpectralParams& p) {
  const double m = p.m;
  const Radii rad = radii_for(lambda, m);
  const RayPowers rp(m, phi);
  auto sqrt_q = [&](double r, cplx prev, bool first) {
    const cplx zm = rp.pow(r, m);
    cplx s = std::sqrt(zm + lambda);
    if (first) {
      s = rp.pow(r, 0.5 * m) * std::sqrt(1.0 + lambda / zm);
    } else if (std::abs(s + prev) < std::abs(s - prev)) {
      s = -s;
    }
    return s;
  };
  // The Riccati segment needs y0 to stay recessive going outward.
  for (int i = 0; i <= 40; ++i) {
    const double r = rad.inner * std::pow(rad.outer / rad.inner, i / 40.0);
    const cplx zm = rp.pow(r, m);
    const cplx s = rp.pow(r, 0.5 * m) * std::sqrt(1.0 + lambda / zm);
    if ((s * rp.e_phi).real() <= 0.0) return HUGE_VAL;
  }
  // Inner segment: parasitic/recessive ratio grows where Re(sqrt(Q) e^{i phi}) < 0.
  constexpr int n = 240;
  const double h = rad.inner / n;
  std::array<double, n + 1> cum{};
  cplx prev = sqrt_q(rad.inner, 0.0, true);
  double prev_rate = (prev * rp.e_phi).real();
  // cum[i] = 2 * integral from r_i to r_s of Re(sqrt(Q) e^{i phi}) dr, r_i = i h.
  for (int i = n - 1; i >= 0; --i) {
    const double r = i * h;
    const cplx s = sqrt_q(r, prev, false);
    const double rate = (s * rp.e_phi).real();
    cum[i] = cum[i + 1] + h * (rate + prev_rate);
    prev = s;
    prev_rate = rate;
  }
  // Error made at r_i is amplified by exp(-(cum[0] - cum[i])) on arrival at 0.
  double amp = 0.0;
  for (int i = 0; i <= n; ++i) amp = std::max(amp, cum[i] - cum[0]);
  return amp;
}

double choose_ray(cplx lambda, const SpectralParams& p) {
  if (lambda.imag() < 0.0) return -choose_ray(std::conj(lambda), p);
  if (lambda == cplx(0.0)) return 0.0;
  const double phi_max = max_ray_angle(p);
  double best_phi = 0.0, best_amp = HUGE_VAL;
  std::array<double, kCandidates> amps{};
  for (int i = 0; i < kCandidates; ++i) {
    const double phi = -phi_max + 2.0 * phi_max * i / (kCandidates - 1);
    amps[i] = ray_amplification(lambda, phi, p);
    best_amp = std::min(best_amp, amps[i]);
  }
  if (!std::isfinite(best_amp)) return 0.0;
  double best_abs = HUGE_VAL;
  for (int i = 0; i < kCandidates; ++i) {
    const double phi = -phi_max + 2.0 * phi_max * i / (kCandidates - 1);
    // Half a log unit of amplification is worth less than a straighter ray.
    if (amps[i] <= best_amp + 0.5 && std::abs(phi) < best_abs - 1e-12) {
      best_abs = std::abs(phi);
      best_phi = phi;
    }
  }
  return best_phi;
}

FValue eval_f_on_ray(cplx lambda, double phi, const SpectralParams& p,
                     const IntegratorConfig& cfg) {
  const double m = p.m;
  if (std::abs(phi) >= kPi / (m + 2.0))
    throw DomainError("ray angle outside the sector where y0 is recessive");
  const Radii rad = radii_for(lambda, m);
  const RayPowers rp(m, phi);

  // Outer segment: stiff Riccati form from R to r_s.
  auto [v, lt] = refined_seed(rad.outer, rp, lambda);
  IntegrationStats stats;
  ShiftedRiccati rhs{rp, lambda};
  detail::radau_drive(rhs, rad.outer, rad.inner, v, lt, cfg, 0.02 * rad.outer,
                      cfg.pole_guard, phi, stats);

  // Inner segment: renormalized linear form from r_s to 0.
  LinearState st;
  st.log_scale = lt - a_ref(rad.inner, rp, lambda);
  st.u = 1.0;
  st.du = rp.e_phi * (v - p_of(rad.inner, rp, lambda));  // d/dr
  const cplx e2 = rp.e_phi * rp.e_phi;
  auto q = [&](double r) { return e2 * (rp.pow(r, m) + lambda); };
  const double k_ref = std::max(1.0, std::sqrt(std::abs(lambda) + std::pow(rad.inner, m)));
  IntegrationStats inner;
  // Near 0 the coefficient r^m is not smooth; finish in s with r = s^4.
  const double r_join = std::min(rad.inner, 1.0 / k_ref);
  const double s_join = std::pow(r_join, 0.25);
  auto q_s = [&](double s) { return e2 * (rp.pow(s * s * s * s, m) + lambda); };
  auto speed_s = [](double s) { return 4.0 * s * s * s; };
  try {
    detail::linear_drive(q, rad.inner, r_join, st, cfg, 0.1 / k_ref, k_ref, inner);
    detail::linear_drive(q_s, s_join, 0.0, st, cfg, 0.1 * s_join, k_ref, inner, speed_s);
  } catch (const PoleEncountered&) {
    throw;
  } catch (const StepFailure& e) {
    throw StepFailure(e.what(), phi);
  }
  stats += inner;

  FValue out;
  out.f = st.value();
  out.f1 = LogValue::from_log(st.log_scale) * LogValue::from_complex(st.du * std::conj(rp.e_phi));
  out.ray_angle = phi;
  const double amp = ray_amplification(lambda, phi, p);
  // Local errors are relative to the running solution size; cancellation
  // down to |f| (near a zero of f) magnifies them.
  const double cancel = std::max(0.0, st.log_peak - out.f.logmod);
  out.est_error = stats.error_estimate * std::exp(std::min(amp + cancel, 700.0));
  return out;
}

FValue eval_f(cplx lambda, const SpectralParams& p, const IntegratorConfig& cfg) {
  const double phi0 = choose_ray(lambda, p);
  const double phi_max = max_ray_angle(p);
  const double sgn = lambda.imag() < 0.0 ? -1.0 : 1.0;
  for (int attempt = 0;; ++attempt) {
    double phi = phi0;
    if (attempt > 0) {
      const int k = (attempt + 1) / 2;
      phi = phi0 + sgn * (attempt % 2 ? 1.0 : -1.0) * 0.03 * k;
      phi = std::clamp(phi, -phi_max - 0.04, phi_max + 0.04);
    }
    try {
      return eval_f_on_ray(lambda, phi, p, cfg);
    } catch (const StepFailure&) {
      if (attempt >= 5) throw;
    }
  }
}

FValue eval_f_omega(int power, cplx lambda, const SpectralParams& p,
                    const IntegratorConfig& cfg) {
  if (lambda == cplx(0.0)) return eval_f(lambda, p, cfg);
  return eval_f(rotate_omega(power, lambda, p), p, cfg);
}

FValue eval_f_rotated(int k, cplx lambda, const SpectralParams& p, const IntegratorConfig& cfg) {
  return eval_f_omega(2 * k, lambda, p, cfg);
}

}  // namespace ptspec
