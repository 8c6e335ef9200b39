#include "ptspec/determinants.hpp"

#include <algorithm>
#include <array>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <map>
#include <mutex>

#include "ptspec/errors.hpp"
#include "ptspec/oracles.hpp"
#include "ptspec/sibuya.hpp"

namespace ptspec {

namespace {

constexpr double kNearZeroLog = 27.631021115928547;  // -log(1e-12)
constexpr double kCancelLog = 30.0;
constexpr double kDenErrLimit = 1e-6;

struct Sum {
  LogValue value;
  double max_logmod = -HUGE_VAL;
  double abs_error = 0.0;  // relative to exp(max_logmod)
};

// Sum of terms with individual relative errors, in log arithmetic.
Sum log_sum(const std::vector<LogValue>& terms, const std::vector<double>& rel_err) {
  Sum s;
  for (const auto& t : terms) s.max_logmod = std::max(s.max_logmod, t.logmod);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    s.value = s.value + terms[i];
    s.abs_error += std::exp(terms[i].logmod - s.max_logmod) * rel_err[i];
  }
  return s;
}

DetValue assemble(std::vector<LogValue> terms, const std::vector<double>& term_err,
                  const LogValue& den, double den_err) {
  DetValue d;
  const Sum s = log_sum(terms, term_err);
  d.terms = std::move(terms);
  d.numerator = s.value;
  d.denominator = den;
  d.value = s.value / den;
  if (s.value.logmod < s.max_logmod - kCancelLog) d.flags |= kCancellation;
  // Near a zero of f the denominator is either tiny against the terms or,
  // when the terms are themselves small, dominated by its own rounding.
  if (den.logmod < s.max_logmod - kNearZeroLog || den_err > kDenErrLimit) d.flags |= kDivisionNearZero;
  const double num_rel = s.abs_error * std::exp(std::min(700.0, s.max_logmod - s.value.logmod));
  d.est_error = num_rel + den_err;
  return d;
}

DetValue eval_C_direct(cplx lambda, const SpectralParams& p, const IntegratorConfig& cfg) {
  const FValue f0 = eval_f(lambda, p, cfg);
  const FValue fp = eval_f_rotated(1, lambda, p, cfg);
  const FValue fm = eval_f_rotated(-1, lambda, p, cfg);
  std::vector<LogValue> terms = {
      LogValue::from_complex(p.omega_half_power(1)) * fp.f,
      LogValue::from_complex(p.omega_half_power(-1)) * fm.f,
  };
  return assemble(std::move(terms), {fp.est_error, fm.est_error}, f0.f, f0.est_error);
}

DetValue eval_D_direct(cplx lambda, const SpectralParams& p, const IntegratorConfig& cfg) {
  const FValue f1 = eval_f_omega(1, lambda, p, cfg);
  const FValue fm1 = eval_f_omega(-1, lambda, p, cfg);
  const FValue f3 = eval_f_omega(3, lambda, p, cfg);
  const FValue fm3 = eval_f_omega(-3, lambda, p, cfg);
  std::vector<LogValue> terms = {
      LogValue::from_complex(p.omega) * f1.f * f3.f,
      LogValue::from_complex(std::conj(p.omega)) * fm1.f * fm3.f,
      f3.f * fm3.f,
  };
  std::vector<double> err = {f1.est_error + f3.est_error, fm1.est_error + fm3.est_error,
                             f3.est_error + fm3.est_error};
  return assemble(std::move(terms), err, f1.f * fm1.f, f1.est_error + fm1.est_error);
}

// When the denominator is ill-conditioned (lambda close to a zero of f)
// the quotient is taken as the mean over 4 points on a small circle, exact
// for analytic functions up to O((kappa delta)^4).
template <class Direct>
DetValue regularized(const Direct& direct, cplx lambda, const SpectralParams& p,
                     const IntegratorConfig& cfg) {
  DetValue d = direct(lambda, p, cfg);
  if (!(d.flags & kDivisionNearZero) || d.est_error < 1e-7) return d;
  // kappa ~ |d log f / d lambda| on the scale of the zero spacing.
  const double kappa = 2.0 * std::max(1.0, std::pow(std::max(1.0, std::abs(lambda)), p.rho - 1.0));
  const double delta = 0.05 / kappa;
  LogValue acc;
  double err = 0.0;
  for (int k = 0; k < 4; ++k) {
    const cplx pt = lambda + delta * std::polar(1.0, kPi / 4 + k * kPi / 2);
    const DetValue s = direct(pt, p, cfg);
    acc = acc + s.value;
    err = std::max(err, s.est_error);
  }
  d.value = scale(acc, 0.25);
  d.est_error = err + std::pow(kappa * delta, 4) / 24.0;
  return d;
}

void require_level(const SpectralParams& p, int level, const char* what) {
  if (p.level != level) throw DomainError(std::string(what) + " requires level " + std::to_string(level) + " parameters");
}

}  // namespace

DetValue eval_C(cplx lambda, const SpectralParams& p, const IntegratorConfig& cfg) {
  require_level(p, 1, "eval_C");
  return regularized(eval_C_direct, lambda, p, cfg);
}

LogValue eval_numerator_C(cplx lambda, const SpectralParams& p, const IntegratorConfig& cfg) {
  require_level(p, 1, "eval_numerator_C");
  const FValue fp = eval_f_rotated(1, lambda, p, cfg);
  const FValue fm = eval_f_rotated(-1, lambda, p, cfg);
  return LogValue::from_complex(p.omega_half_power(1)) * fp.f +
         LogValue::from_complex(p.omega_half_power(-1)) * fm.f;
}

DetValue eval_D(cplx lambda, const SpectralParams& p, const IntegratorConfig& cfg) {
  require_level(p, 2, "eval_D");
  return regularized(eval_D_direct, lambda, p, cfg);
}

LogValue eval_numerator_D(cplx lambda, const SpectralParams& p, const IntegratorConfig& cfg) {
  require_level(p, 2, "eval_numerator_D");
  const FValue f1 = eval_f_omega(1, lambda, p, cfg);
  const FValue fm1 = eval_f_omega(-1, lambda, p, cfg);
  const FValue f3 = eval_f_omega(3, lambda, p, cfg);
  const FValue fm3 = eval_f_omega(-3, lambda, p, cfg);
  return LogValue::from_complex(p.omega) * f1.f * f3.f +
         LogValue::from_complex(std::conj(p.omega)) * fm1.f * fm3.f + f3.f * fm3.f;
}

DetValue eval_det(cplx lambda, const SpectralParams& p, const IntegratorConfig& cfg) {
  return p.level == 1 ? eval_C(lambda, p, cfg) : eval_D(lambda, p, cfg);
}

cplx EigenMap::lambda_of_E(cplx e) const {
  if (!calibrated) throw CalibrationAmbiguous("EigenMap used before calibration");
  return double(sign) * e;
}

cplx EigenMap::E_of_lambda(cplx lambda) const {
  if (!calibrated) throw CalibrationAmbiguous("EigenMap used before calibration");
  return double(sign) * lambda;
}

std::vector<double> real_det_zeros(const SpectralParams& p, double lo, double hi, double step,
                                   const IntegratorConfig& cfg) {
  // The determinant is real on the real axis; use the sign of its real part.
  auto value = [&](double x) {
    const LogValue v = eval_det(x, p, cfg).value;
    return std::cos(v.phase) * std::exp(std::clamp(v.logmod, -600.0, 600.0));
  };
  std::vector<double> out;
  double xa = lo, va = value(lo);
  const int n = static_cast<int>(std::ceil((hi - lo) / step));
  for (int i = 1; i <= n; ++i) {
    const double xb = std::min(hi, lo + i * step);
    const double vb = value(xb);
    if (va == 0.0) {
      out.push_back(xa);
    } else if ((va > 0) != (vb > 0) && vb != 0.0) {
      boost::uintmax_t iters = 100;
      auto r = boost::math::tools::toms748_solve(
          value, xa, xb, va, vb, boost::math::tools::eps_tolerance<double>(48), iters);
      out.push_back(0.5 * (r.first + r.second));
    }
    xa = xb;
    va = vb;
  }
  return out;
}

EigenMap calibrate_sign(const SpectralParams& p, const IntegratorConfig& cfg) {
  std::vector<double> oracle;
  SpectralParams cal;
  if (p.M == 1) {
    cal = make_params(1, 1.0, 1);
    for (const auto& e : cubic_pt_spectrum(200, 2.5)) {
      if (e.real() > 0) oracle.push_back(e.real());
      if (oracle.size() == 3) break;
    }
  } else if (p.M == 2) {
    cal = make_params(2, 0.0, 2);
    oracle = quartic_spectrum(3);
  } else {
    throw DomainError("calibration case available only for M = 1, 2");
  }
  const double reach = 1.3 * oracle.back() + 1.0;
  const auto zeros = real_det_zeros(cal, -reach, reach, 0.2, cfg);

  auto match = [&](int sign) {
    std::vector<double> es;
    for (double z : zeros) es.push_back(sign * z);
    std::sort(es.begin(), es.end());
    std::vector<double> pos;
    for (double e : es)
      if (e > 0) pos.push_back(e);
    if (pos.size() < 3) return HUGE_VAL;
    double err = 0.0;
    for (int i = 0; i < 3; ++i) err = std::max(err, std::abs(pos[i] - oracle[i]) / oracle[i]);
    return err;
  };
  const double e_minus = match(-1), e_plus = match(+1);
  const bool ok_minus = e_minus < 1e-3, ok_plus = e_plus < 1e-3;
  if (ok_minus == ok_plus)
    throw CalibrationAmbiguous("calibration: conventions lambda = -E and lambda = +E give errors " +
                               std::to_string(e_minus) + " and " + std::to_string(e_plus));
  EigenMap map;
  map.sign = ok_minus ? -1 : 1;
  map.calibrated = true;
  map.match_error = ok_minus ? e_minus : e_plus;
  return map;
}

const EigenMap& calibrated_map(int M, const IntegratorConfig& cfg) {
  static std::mutex mu;
  static std::map<int, EigenMap> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(M);
  if (it == cache.end()) {
    const SpectralParams p = M == 1 ? make_params(1, 1.0, 1) : make_params(M, 0.0, M);
    it = cache.emplace(M, calibrate_sign(p, cfg)).first;
  }
  return it->second;
}

}  // namespace ptspec
