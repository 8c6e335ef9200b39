#pragma once

#include "ptspec/log_value.hpp"
#include "ptspec/ode.hpp"
#include "ptspec/params.hpp"

namespace ptspec {

// f(lambda) = y0(0, lambda) and f1(lambda) = y0'(0, lambda).
struct FValue {
  LogValue f;
  LogValue f1;
  double ray_angle = 0.0;  // arg z of the integration ray
  double est_error = 0.0;  // relative, including cancellation near zeros of f
};

// Largest |arg z| used for integration rays.
double max_ray_angle(const SpectralParams& p);

// Ray angle for lambda: the least error amplification among a fixed set of
// candidates, ties going to the smaller |angle|. choose_ray(conj l) = -choose_ray(l).
double choose_ray(cplx lambda, const SpectralParams& p);

// Growth of parasitic solutions relative to y0 along the ray (log units).
double ray_amplification(cplx lambda, double phi, const SpectralParams& p);

// Integrates along the given ray without retries.
FValue eval_f_on_ray(cplx lambda, double phi, const SpectralParams& p,
                     const IntegratorConfig& cfg = {});

// Chooses the ray, retrying with perturbed rays after PoleEncountered/StepFailure.
FValue eval_f(cplx lambda, const SpectralParams& p, const IntegratorConfig& cfg = {});

// f at omega^{2k} lambda on the principal branch.
FValue eval_f_rotated(int k, cplx lambda, const SpectralParams& p,
                      const IntegratorConfig& cfg = {});

// f at omega^{power} lambda on the principal branch (power may be odd).
FValue eval_f_omega(int power, cplx lambda, const SpectralParams& p,
                    const IntegratorConfig& cfg = {});

}  // namespace ptspec
