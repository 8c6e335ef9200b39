#include "ptspec/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "ptspec/asym.hpp"
#include "ptspec/determinants.hpp"
#include "ptspec/errors.hpp"
#include "ptspec/oracles.hpp"
#include "ptspec/sibuya.hpp"
#include "ptspec/sweep.hpp"
#include "ptspec/zeros.hpp"

namespace ptspec {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<double> log_grid(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(lo * std::pow(hi / lo, double(i) / (n - 1)));
  return out;
}

double slope_fit(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Criterion 1.
CriterionResult calibration(const VerifyOptions& o) {
  CriterionResult r{1, "calibration oracles (cubic, quartic)", false, "", 0.0};
  std::ostringstream d;
  bool ok = true;
  {
    const auto t0 = Clock::now();
    std::vector<double> oracle;
    for (const auto& e : cubic_pt_spectrum(200, 2.5))
      if (e.real() > 0 && oracle.size() < 3) oracle.push_back(e.real());
    const auto z = real_det_zeros(make_params(1, 1.0, 1), 0.2, 9.0, 0.2, o.integ);
    double err = HUGE_VAL;
    if (z.size() >= 3 && oracle.size() == 3) {
      err = 0.0;
      for (int i = 0; i < 3; ++i) err = std::max(err, rel_err(z[i], oracle[i]));
    }
    const double t = seconds_since(t0);
    ok = ok && err < 1e-5 && t < 60.0;
    d << "cubic max rel err " << err << " (" << t << " s); ";
  }
  {
    const auto t0 = Clock::now();
    const auto oracle = quartic_spectrum(3);
    const auto z = real_det_zeros(make_params(2, 0.0, 2), 0.2, 9.0, 0.2, o.integ);
    double err = HUGE_VAL;
    if (z.size() >= 3) {
      err = 0.0;
      for (int i = 0; i < 3; ++i) err = std::max(err, rel_err(z[i], oracle[i]));
    }
    const double t = seconds_since(t0);
    ok = ok && err < 1e-5 && t < 60.0;
    d << "quartic max rel err " << err << " (" << t << " s)";
  }
  r.pass = ok;
  r.detail = d.str();
  return r;
}

// Criterion 2.
CriterionResult zero_reality(const VerifyOptions& o) {
  CriterionResult r{2, "zeros of f with |lambda| <= 80 are negative reals", false, "", 0.0};
  std::ostringstream d;
  bool ok = true;
  for (double m : {1.5, 2.5, 3.5}) {
    const auto p = params_from_m(m);
    const auto f = make_func(FuncId::F, p, o.integ);
    double radius = 80.0;
    int w = -1;
    for (int attempt = 0; attempt < 3 && w < 0; ++attempt) {
      try {
        w = winding_count(f, Region::disk(0.0, radius));
      } catch (const BoundaryZeroSuspected&) {
        radius *= 1.0001;
      }
    }
    const auto real = find_real_zeros(f, -radius, 0.0, 0.25);
    ok = ok && w == int(real.size());
    d << "m=" << m << ": winding " << w << ", negative real zeros " << real.size() << "; ";
  }
  r.pass = ok;
  r.detail = d.str();
  return r;
}

double c1_formula(double m) { return m / 32.0 * beta_fn(2.0 - 1.0 / m, 0.5 + 1.0 / m); }

std::vector<double> picard_samples(const std::vector<double>& mu, double m) {
  std::vector<double> out;
  for (double x : mu) out.push_back(picard_F0(x, m));
  return out;
}

// Criterion 3.
CriterionResult constants(const VerifyOptions& o) {
  CriterionResult r{3, "asymptotic constants K_m and c1", false, "", 0.0};
  std::ostringstream d;
  bool ok = true;
  for (double m : {1.5, 3.0}) {
    const auto p = params_from_m(m);
    std::vector<double> x, y;
    for (double l : log_grid(100.0, 1000.0, 12)) {
      x.push_back(std::pow(l, p.rho));
      y.push_back(eval_f(l, p, o.integ).f.logmod + 0.25 * std::log(l));
    }
    const double fit = slope_fit(x, y), km = compute_Km(m);
    ok = ok && rel_err(fit, km) < 0.01;
    d << "m=" << m << ": K_m fit " << fit << " vs " << km << "; ";
  }
  const std::vector<double> mu = log_grid(20.0, 5000.0, 40);
  const PsiFit fit = psi_fit(mu, picard_samples(mu, 2.5), 5, 2.5, 0.0);
  const double c1 = c1_formula(2.5);
  ok = ok && rel_err(fit.int_coeffs[0], c1) < 0.005;
  d << "c1 fit " << fit.int_coeffs[0] << " vs " << c1;
  r.pass = ok;
  r.detail = d.str();
  return r;
}

// Criterion 4.
CriterionResult nonint_term(const VerifyOptions&) {
  CriterionResult r{4, "non-integer term of F(0, mu)", false, "", 0.0};
  const std::vector<double> mu = log_grid(20.0, 5000.0, 40);
  const std::vector<double> f25 = picard_samples(mu, 2.5), f3 = picard_samples(mu, 3.0);
  const PsiFit free = psi_fit(mu, f25, 5, 2.0, 3.0);
  const PsiFit fixed = psi_fit(mu, f25, 5, 2.5, 0.0);
  const PsiFit integer = psi_fit(mu, f3, 6, 3.0, 0.0);
  const double stated = std::tgamma(3.5) / 8.0;
  const double derived = -std::pow(2.0, -1.5) * std::tgamma(3.5) / 8.0;
  const bool exp_ok = std::abs(free.nonint_exponent - 2.5) < 0.05;
  const bool coeff_ok = rel_err(fixed.nonint_coeff, stated) < 0.05;
  const bool int_ok = std::abs(integer.nonint_coeff) * 1e3 <= std::abs(fixed.nonint_coeff);
  std::ostringstream d;
  d << "exponent " << free.nonint_exponent << (exp_ok ? " ok" : " FAIL") << "; coefficient " << fixed.nonint_coeff
    << " vs Gamma(m+1)/8 = " << stated << (coeff_ok ? " ok" : " FAIL") << " (-2^{1-m} Gamma(m+1)/8 = " << derived
    << "); m=3 " << (integer.log_term ? "mu^-3 log mu" : "mu^-3") << " coefficient " << integer.nonint_coeff
    << (int_ok ? " ok" : " FAIL");
  r.pass = exp_ok && coeff_ok && int_ok;
  r.detail = d.str();
  return r;
}

// Criterion 5.
CriterionResult cross_path(const VerifyOptions& o) {
  CriterionResult r{5, "Picard vs Sibuya path", false, "", 0.0};
  const double m = 2.5;
  const auto p = params_from_m(m);
  const double km = compute_Km(m);
  double worst = 0.0;
  for (double mu : log_grid(10.0, 500.0, 10)) {
    const double l = std::pow(mu, 1.0 / p.rho);
    const double via_f = std::exp(eval_f(l, p, o.integ).f.logmod + 0.25 * std::log(l) - km * mu);
    worst = std::max(worst, std::abs(via_f / picard_F0(mu, m) - 1.0));
  }
  r.pass = worst < 1e-6;
  std::ostringstream d;
  d << "max relative difference " << worst << " over 10 mu in [10, 500]";
  r.detail = d.str();
  return r;
}

// Criterion 6.
CriterionResult root_asymptotics(const VerifyOptions& o) {
  CriterionResult r{6, "zeros of f follow the root asymptotics", false, "", 0.0};
  const auto p = params_from_m(1.5);
  const AsymConstants k = asym_constants(p.m);
  const auto zs = find_real_zeros(make_func(FuncId::F, p, o.integ), asr_root(21, p), -0.1, 0.25);
  std::vector<double> z(zs.rbegin(), zs.rend());  // nearest to 0 first
  std::ostringstream d;
  if (z.size() < 20) {
    d << "only " << z.size() << " zeros found";
    r.detail = d.str();
    return r;
  }
  bool ok = true;
  double prev = HUGE_VAL, ratio = 0.0;
  for (int n = 5; n <= 20; ++n) {
    const double spacing = std::pow(k.a, 1.0 / p.rho) / p.rho * std::pow(double(n), 1.0 / p.rho - 1.0);
    ratio = std::abs(z[n - 1] - asr_root(n, p)) / spacing;
    ok = ok && ratio < prev;
    if (n == 5 || n == 10 || n == 20) d << "n=" << n << " ratio " << ratio << "; ";
    prev = ratio;
  }
  ok = ok && ratio < 0.05;
  d << (ok ? "decreasing" : "not decreasing or too large");
  r.pass = ok;
  r.detail = d.str();
  return r;
}

// Real positive zeros of the numerator of C not shared with f, up to x_max.
int positive_real_eigs(const SpectralParams& p, double x_max, const IntegratorConfig& integ) {
  return int(find_real_zeros(make_func(FuncId::NumeratorC, p, integ), 0.05, x_max, 0.25).size());
}

// Criterion 7. Gaps at the numerical noise floor count as non-increasing.
CriterionResult cancellation(const VerifyOptions& o) {
  CriterionResult r{7, "cancellation of numerator zeros by zeros of f", false, "", 0.0};
  const auto p = params_from_m(1.5);
  const CancellationReport a = cancellation_report(p, o.integ, 20);
  const CancellationReport b = cancellation_report(p, o.integ, 40);
  const double floor = 1e-9;
  bool ok = a.pairs.size() == 20 && a.unpaired_f.empty();
  double prev = HUGE_VAL, worst = 0.0;
  for (const auto& pr : a.pairs) {
    ok = ok && pr.ratio < 0.2 && (pr.ratio <= prev || pr.ratio < floor);
    worst = std::max(worst, pr.ratio);
    prev = pr.ratio;
  }
  const int pos20 = positive_real_eigs(p, -asr_root(20, p), o.integ);
  const int pos40 = positive_real_eigs(p, -asr_root(40, p), o.integ);
  ok = ok && a.unpaired_numerator.size() == b.unpaired_numerator.size() && pos20 == pos40;
  std::ostringstream d;
  d << a.pairs.size() << " pairs, max gap/spacing " << worst << "; unpaired near the negative axis "
    << a.unpaired_numerator.size() << " (n_max 20) vs " << b.unpaired_numerator.size()
    << " (n_max 40); real positive zeros of C " << pos20 << " vs " << pos40;
  r.pass = ok;
  r.detail = d.str();
  return r;
}

// Criterion 8.
CriterionResult accumulation(const VerifyOptions& o) {
  CriterionResult r{8, "accumulation angles of non-real eigenvalues", false, "", 0.0};
  const auto t0 = Clock::now();
  std::ostringstream d;
  bool ok = true;
  for (auto [M, eps] : {std::pair{1, -0.5}, std::pair{2, -0.5}}) {
    AccumulationConfig cfg;
    cfg.sweep.integ = o.integ;
    try {
      const AccumulationReport rep = accumulation_check(make_params(M, eps, M), cfg, 8);
      ok = ok && rep.decreasing && !rep.slow_approach && rep.verified;
      d << "M=" << M << " target " << rep.target << ": last deviations";
      for (std::size_t i = 4; i < rep.deviations.size(); ++i) d << " " << rep.deviations[i];
      d << " at |E| " << std::abs(rep.eigenvalues.back()) << (rep.decreasing ? "" : " (not decreasing)")
        << (rep.verified ? "" : " (window winding mismatch)") << "; ";
    } catch (const Error& e) {
      ok = false;
      d << "M=" << M << ": " << e.what() << "; ";
    }
  }
  const double t = seconds_since(t0);
  ok = ok && t < 600.0;
  d << t << " s";
  r.pass = ok;
  r.detail = d.str();
  return r;
}

// Criterion 9.
CriterionResult identity(const VerifyOptions& o) {
  CriterionResult r{9, "level-2 determinant identity", false, "", 0.0};
  const auto p2 = params_from_m(3.5, 2);
  const auto p1 = params_from_m(3.5, 1);
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> area(0.0, 400.0), ang(-kPi, kPi);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const cplx l = std::polar(std::sqrt(area(rng)), ang(rng));
    const cplx dv = eval_D(l, p2, o.integ).value.to_complex();
    const cplx c1 = eval_C(p2.omega * l, p1, o.integ).value.to_complex();
    const cplx c2 = eval_C(std::conj(p2.omega) * l, p1, o.integ).value.to_complex();
    worst = std::max(worst, std::abs(dv - (c1 * c2 - 1.0)) / (1.0 + std::abs(c1 * c2)));
  }
  r.pass = worst <= 1e-6;
  std::ostringstream d;
  d << "max |D - (C C - 1)| / scale " << worst << " over 50 points, |lambda| <= 20";
  r.detail = d.str();
  return r;
}

// Criterion 10.
CriterionResult figures(const VerifyOptions& o) {
  CriterionResult r{10, "sweep structure (M=1 merges, M=2 eps=-1 real)", false, "", 0.0};
  SweepConfig cfg;
  cfg.integ = o.integ;
  cfg.merge_refine_depth = 1;
  std::ostringstream d;
  bool ok = true;
  const auto recs = sweep_eps(1, 1, 0.9, -0.9, 0.1, 30.0, cfg);
  int failed = 0, complex_nonneg = 0;
  for (const SweepRecord& s : recs) {
    if (s.gap) continue;
    if (!s.error.empty() || !s.verified) ++failed;
    else if (s.eps >= 0.0) complex_nonneg += int(s.complex_pairs.size());
  }
  std::vector<MergeEvent> merges;
  try {
    merges = detect_merges(recs, cfg);
  } catch (const UnresolvedTransition& e) {
    ok = false;
    d << "unresolved transition: " << e.what() << "; ";
  }
  // Before the first merge, eigenvalues still enter below E_max as eps decreases.
  double first_merge = -HUGE_VAL;
  for (const MergeEvent& m : merges) first_merge = std::max(first_merge, std::min(m.eps_interval.first, m.eps_interval.second));
  bool monotone = true;
  int prev_real = -1;
  std::ostringstream counts;
  for (const SweepRecord& s : recs) {
    if (s.gap || !s.error.empty() || s.eps > first_merge) continue;
    if (prev_real >= 0 && int(s.real_eigs.size()) > prev_real) monotone = false;
    prev_real = int(s.real_eigs.size());
    counts << (counts.tellp() > 0 ? " " : "") << prev_real;
  }
  int merges_nonneg = 0;
  for (const MergeEvent& m : merges)
    if (m.eps_interval.second >= 0.0) ++merges_nonneg;
  ok = ok && failed == 0 && complex_nonneg == 0 && merges_nonneg == 0 && !merges.empty() && monotone;
  d << "M=1: " << recs.size() << " records, " << failed << " failed, " << merges.size() << " merges, "
    << complex_nonneg << " pairs at eps >= 0, real count " << (monotone ? "non-increasing" : "INCREASES")
    << " after the first merge (" << counts.str() << "); ";

  std::error_code ec;
  std::filesystem::create_directories(o.out_dir, ec);
  const std::string csv = (std::filesystem::path(o.out_dir) / "sweep_M1.csv").string();
  std::ofstream(csv) << records_csv(recs);
  std::ofstream((std::filesystem::path(o.out_dir) / "sweep_M1.json").string()) << sweep_json(recs, merges) << "\n";
  const bool csv_ok = std::filesystem::file_size(csv, ec) > 0 && !ec;
  ok = ok && csv_ok;
  d << "CSV " << (csv_ok ? csv : "not written") << "; ";

  const SweepRecord q = solve_record(2, 2, -1.0, 30.0, cfg);
  const bool q_ok = q.error.empty() && q.verified && q.complex_pairs.empty() && !q.real_eigs.empty();
  ok = ok && q_ok;
  d << "M=2 eps=-1: " << q.real_eigs.size() << " real, " << q.complex_pairs.size() << " pairs"
    << (q.error.empty() ? "" : " error " + q.error);
  r.pass = ok;
  r.detail = d.str();
  return r;
}

// Criterion 11.
CriterionResult sector(const VerifyOptions& o) {
  CriterionResult r{11, "no zeros of C in the sector |arg lambda| < pi(2-m)/(2+m)", false, "", 0.0};
  const auto p = params_from_m(1.5);
  const double th = accumulation_angles(p).second;
  const auto num = make_func(FuncId::NumeratorC, p, o.integ);
  // f has no zeros off the negative axis, so zeros of C here are zeros of its numerator.
  int total = winding_count(num, Region::disk(0.0, 0.5));
  const std::vector<double> radii = {0.5, 3.7, 11.3, 27.9, 55.1, 100.0};
  std::ostringstream d;
  d << "tile windings: disk(0.5) " << total;
  for (std::size_t i = 1; i < radii.size(); ++i) {
    const int w = winding_count(num, Region::sector(radii[i - 1], radii[i], -th, th));
    d << ", [" << radii[i - 1] << ", " << radii[i] << "] " << w;
    total += w;
  }
  d << "; total " << total;
  r.pass = total == 0;
  r.detail = d.str();
  return r;
}

// Full suite only: sweep invariants.
CriterionResult sweep_invariants(const VerifyOptions& o) {
  CriterionResult r{12, "sweep invariants (conjugate closure, warm = cold, E_max doubling)", false, "", 0.0};
  SweepConfig cfg;
  cfg.integ = o.integ;
  const SweepRecord a = solve_record(1, 1, -0.45, 30.0, cfg);
  const SweepRecord warm = solve_record(1, 1, -0.5, 30.0, cfg, &a);
  const SweepRecord cold = solve_record(1, 1, -0.5, 30.0, cfg);
  bool closure = true;
  for (const auto& pr : cold.complex_pairs) closure = closure && pr.second == std::conj(pr.first);
  bool same = warm.real_eigs.size() == cold.real_eigs.size() && warm.complex_pairs.size() == cold.complex_pairs.size();
  double diff = 0.0;
  if (same) {
    for (std::size_t i = 0; i < warm.real_eigs.size(); ++i)
      diff = std::max(diff, std::abs(warm.real_eigs[i] - cold.real_eigs[i]) / (1 + std::abs(cold.real_eigs[i])));
    for (std::size_t i = 0; i < warm.complex_pairs.size(); ++i)
      diff = std::max(diff, std::abs(warm.complex_pairs[i].first - cold.complex_pairs[i].first) /
                                (1 + std::abs(cold.complex_pairs[i].first)));
  }
  same = same && diff < 1e-6;
  const SweepRecord big = solve_record(1, 1, -0.5, 60.0, cfg);
  const bool stable = big.error.empty() && big.real_eigs.size() == cold.real_eigs.size();
  std::ostringstream d;
  d << "closure " << (closure ? "ok" : "FAIL") << "; warm vs cold max rel diff " << diff << "; real count E_max 30 "
    << cold.real_eigs.size() << ", E_max 60 " << big.real_eigs.size();
  r.pass = closure && same && stable;
  r.detail = d.str();
  return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const VerifyOptions& opt) {
  if (opt.suite != "quick" && opt.suite != "full") throw DomainError("suite must be quick or full");
  using Fn = CriterionResult (*)(const VerifyOptions&);
  std::vector<std::pair<int, Fn>> list = {{1, calibration},       {2, zero_reality},  {3, constants},
                                          {4, nonint_term},       {5, cross_path},    {6, root_asymptotics},
                                          {7, cancellation},      {8, accumulation},  {9, identity},
                                          {10, figures},          {11, sector}};
  if (opt.suite == "full") list.push_back({12, sweep_invariants});
  std::vector<CriterionResult> out;
  for (auto [id, fn] : list) {
    if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), id) == opt.only.end()) continue;
    const auto t0 = Clock::now();
    CriterionResult r;
    try {
      r = fn(opt);
    } catch (const std::exception& e) {
      r.id = id;
      r.name = "criterion " + std::to_string(id);
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = seconds_since(t0);
    if (opt.on_result) opt.on_result(r);
    out.push_back(r);
  }
  return out;
}

}  // namespace ptspec
