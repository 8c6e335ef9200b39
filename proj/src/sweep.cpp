#include "ptspec/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "ptspec/errors.hpp"

namespace ptspec {

namespace {

FuncId numerator_id(int level) { return level == 1 ? FuncId::NumeratorC : FuncId::NumeratorD; }

double rel(cplx z) { return 1.0 + std::abs(z); }

void add_unique(std::vector<cplx>& zs, cplx z, double tol) {
  for (const cplx& w : zs)
    if (std::abs(w - z) < tol * rel(z)) return;
  zs.push_back(z);
}

// Zeros of the denominator: f(l) for level 1, f(omega l) f(omega^-1 l) for level 2.
std::vector<cplx> denominator_zeros(const SpectralParams& p, double reach, const SweepConfig& cfg) {
  const auto f = make_func(FuncId::F, p, cfg.integ);
  std::vector<cplx> out;
  for (double r : find_real_zeros(f, -reach, 0.0, cfg.real_scan_step)) {
    if (p.level == 1) {
      out.push_back(r);
    } else {
      out.push_back(rotate_omega(-1, r, p));
      out.push_back(rotate_omega(1, r, p));
    }
  }
  return out;
}

double nearest(const std::vector<cplx>& zs, cplx z) {
  double d = HUGE_VAL;
  for (const cplx& w : zs) d = std::min(d, std::abs(w - z));
  return d;
}

double min_gap(const std::vector<cplx>& zs, std::size_t i, double cap) {
  double gap = cap;
  for (std::size_t j = 0; j < zs.size(); ++j)
    if (j != i) gap = std::min(gap, std::abs(zs[i] - zs[j]));
  return gap;
}

AnalyticFn numerator_at(const SweepRecord& rec, double eps, const SweepConfig& cfg) {
  // The solver excludes m = 2 exactly; a sub-step landing there is nudged.
  if (std::abs(2.0 * rec.M + eps - 2.0) < 1e-9) eps += 1e-7;
  const SpectralParams p = make_params(rec.M, eps, rec.level, rec.level != rec.M);
  return make_func(numerator_id(p.level), p, cfg.integ);
}

struct Walk {
  cplx z;
  bool done = false;
  double eps_stop = 0.0;  // where a failed walk gave up
};

// Newton continuation of one zero in eps, halving the sub-step on failure.
// Intermediate points are polished loosely from a secant prediction.
Walk walk_zero(const SweepRecord& rec, cplx z, double eps, double radius, const SweepConfig& cfg) {
  const double total = rec.eps - eps;
  double h = total / std::max(1.0, std::ceil(std::abs(total) / cfg.continuation_step));
  const double h_min = std::abs(total) / 64.0;
  ZeroSearchConfig loose = cfg.zeros;
  loose.newton_rel_tol = 1e-6;
  cplx velocity = 0.0;  // dz / d eps from the last accepted sub-step
  while (std::abs(rec.eps - eps) > 1e-14) {
    if (std::abs(h) > std::abs(rec.eps - eps)) h = rec.eps - eps;
    const bool last = std::abs(rec.eps - eps - h) <= 1e-14;
    cplx guess = z + velocity * h;
    if (std::abs(guess - z) > 0.5 * radius) guess = z;
    try {
      const cplx next = polish_zero(numerator_at(rec, eps + h, cfg), guess, radius, last ? cfg.zeros : loose);
      velocity = (next - z) / h;
      z = next;
      eps += h;
      h *= 1.5;
    } catch (const InversionFailure&) {
      h *= 0.5;
      if (std::abs(h) < h_min) return {z, false, eps + h};
    }
  }
  return {z, true, rec.eps};
}

// Carries the eigenvalue zeros of `warm` (upper half plane and real axis) to
// the eps of `rec`. Real pairs that collide on the way are restarted as a
// complex pair from their midpoint.
std::vector<cplx> continue_zeros(const SweepRecord& warm, const SweepRecord& rec, const SweepConfig& cfg) {
  std::vector<cplx> seeds;
  for (const cplx& z : warm.tracked)
    if (std::find(warm.cancelled.begin(), warm.cancelled.end(), z) == warm.cancelled.end() &&
        z.imag() > -cfg.real_tol * rel(z))
      seeds.push_back(z);
  const double cap = 0.25 * rec.E_max;
  std::vector<cplx> out;
  std::vector<Walk> lost_real;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const Walk w = walk_zero(rec, seeds[i], warm.eps, 0.5 * min_gap(seeds, i, cap), cfg);
    if (w.done)
      add_unique(out, w.z, 1e-7);
    else if (std::abs(w.z.imag()) < cfg.real_tol * rel(w.z))
      lost_real.push_back(w);
  }
  std::sort(lost_real.begin(), lost_real.end(), [](const Walk& a, const Walk& b) { return a.z.real() < b.z.real(); });
  for (std::size_t i = 0; i + 1 < lost_real.size(); i += 2) {
    const double lo = lost_real[i].z.real(), hi = lost_real[i + 1].z.real();
    const double e0 = 0.5 * (lost_real[i].eps_stop + lost_real[i + 1].eps_stop);
    const double half = std::max(0.5 * (hi - lo), 1e-3 * rel(lo));
    try {
      const cplx start = polish_zero(numerator_at(rec, e0, cfg), cplx(0.5 * (lo + hi), half), 4.0 * half, cfg.zeros);
      const Walk w = walk_zero(rec, start, e0, 4.0 * half, cfg);
      if (w.done) add_unique(out, w.z, 1e-7);
    } catch (const InversionFailure&) {
    }
  }
  return out;
}

// Extends the string of complex zeros outwards by secant prediction until it leaves the box.
void extend_string(std::vector<cplx>& known, const AnalyticFn& num, const Region& box, const SweepConfig& cfg) {
  std::vector<cplx> str;
  for (const cplx& z : known)
    if (z.imag() > cfg.real_tol * rel(z)) str.push_back(z);
  std::sort(str.begin(), str.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
  while (str.size() >= 2) {
    const cplx a = str[str.size() - 2], b = str.back();
    const double h = std::abs(b - a);
    cplx z;
    try {
      z = polish_zero(num, 2.0 * b - a, 0.5 * h, cfg.zeros);
    } catch (const InversionFailure&) {
      return;
    }
    const double step = std::abs(z - b);
    if (!(std::abs(z) > std::abs(b)) || step < 0.5 * h || step > 2.0 * h || !box.contains(z)) return;
    str.push_back(z);
    add_unique(known, z, 1e-7);
  }
}

double residual_at(cplx lambda, const SpectralParams& p, const IntegratorConfig& icfg) {
  const DetValue d = eval_det(lambda, p, icfg);
  double top = -HUGE_VAL;
  for (const LogValue& t : d.terms) top = std::max(top, t.logmod);
  return std::exp(d.numerator.logmod - top);
}

void fill_tracked(SweepRecord& rec, const SpectralParams& p, const SweepConfig& cfg, const SweepRecord* warm) {
  const AnalyticFn num = make_func(numerator_id(p.level), p, cfg.integ);
  const double tol = 1e-7;
  std::string last_error;
  for (int attempt = 0; attempt < 4; ++attempt) {
    const double s = 1.0 + 0.0137 * attempt;
    const double L = cfg.reach * rec.E_max * s, below = cfg.below_axis * rec.E_max * s;
    const Region box = Region::rect({-L, -below}, {L, L});
    try {
      const std::vector<cplx> den = denominator_zeros(p, 1.5 * L, cfg);
      std::vector<cplx> known;
      for (double x : find_real_zeros(num, -L, L, cfg.real_scan_step)) add_unique(known, x, tol);
      for (const cplx& d : den) {
        if (!box.contains(d)) continue;
        try {
          add_unique(known, polish_zero(num, d, 1e-3 * rel(d), cfg.zeros), tol);
        } catch (const InversionFailure&) {
        }
      }
      if (warm != nullptr)
        for (const cplx& z : continue_zeros(*warm, rec, cfg)) add_unique(known, z, tol);

      auto close_up = [&] {
        std::vector<cplx> kept;
        for (const cplx& z : known)
          if (box.contains(z)) add_unique(kept, z, tol);
        for (const cplx& z : std::vector<cplx>(kept))
          if (std::abs(z.imag()) >= cfg.real_tol * rel(z) && box.contains(std::conj(z)))
            add_unique(kept, std::conj(z), tol);
        known = kept;
      };
      close_up();
      extend_string(known, num, box, cfg);
      close_up();
      const int W = winding_count(num, box, cfg.zeros.samples_per_side, cfg.zeros);

      if (W > int(known.size())) {
        // Divide out the zeros already known and search what is left.
        const std::vector<cplx> k0 = known;
        const AnalyticFn deflated = [&num, k0](cplx z) {
          LogValue v = num(z);
          for (const cplx& w : k0) v = v / LogValue::from_complex(z - w);
          return v;
        };
        for (const ZeroRecord& r : search_zeros(deflated, box, FuncId::Other, cfg.zeros).records) {
          cplx z = r.location;
          try {
            z = polish_zero(num, z, 1e-3 * rel(z), cfg.zeros);
          } catch (const InversionFailure&) {
          }
          add_unique(known, z, tol);
        }
        close_up();
      }
      if (W != int(known.size())) {
        known.clear();
        for (const ZeroRecord& r : search_zeros(num, box, numerator_id(p.level), cfg.zeros).records)
          add_unique(known, r.location, tol);
        close_up();
      }

      std::sort(known.begin(), known.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
      rec.tracked = known;
      rec.winding = W;
      rec.verified = W == int(known.size());
      rec.cancelled.clear();
      for (const cplx& z : known)
        if (nearest(den, z) < cfg.cancel_tol * rel(z)) rec.cancelled.push_back(z);
      return;
    } catch (const BoundaryZeroSuspected& e) {
      last_error = e.what();
    }
  }
  throw BoundaryZeroSuspected("tracked rectangle kept hitting zeros: " + last_error);
}

void classify(SweepRecord& rec, const SpectralParams& p, const SweepConfig& cfg) {
  const EigenMap& map = calibrated_map(p.M, cfg.integ);
  struct Eig {
    cplx E, lambda;
  };
  std::vector<Eig> reals, pairs;
  for (const cplx& z : rec.tracked) {
    if (std::find(rec.cancelled.begin(), rec.cancelled.end(), z) != rec.cancelled.end()) continue;
    const cplx E = map.E_of_lambda(z);
    if (std::abs(E) > rec.E_max) continue;
    if (std::abs(E.imag()) < cfg.real_tol * rel(E))
      reals.push_back({E.real(), z});
    else if (E.imag() > 0.0)
      pairs.push_back({E, z});
  }
  std::sort(reals.begin(), reals.end(), [](const Eig& a, const Eig& b) { return a.E.real() < b.E.real(); });
  std::sort(pairs.begin(), pairs.end(), [](const Eig& a, const Eig& b) { return std::abs(a.E) < std::abs(b.E); });

  auto zero_record = [&](cplx z) {
    ZeroRecord r;
    r.location = z;
    r.verified = rec.verified;
    r.func_id = numerator_id(p.level);
    r.winding_cell = Region::rect({-cfg.reach * rec.E_max, -cfg.below_axis * rec.E_max},
                                  {cfg.reach * rec.E_max, cfg.reach * rec.E_max});
    r.newton_residual = residual_at(z, p, cfg.integ);
    return r;
  };
  for (const Eig& e : reals) {
    rec.real_eigs.push_back(e.E.real());
    rec.zero_records.push_back(zero_record(e.lambda));
    rec.real_residuals.push_back(rec.zero_records.back().newton_residual);
  }
  for (const Eig& e : pairs) {
    rec.complex_pairs.emplace_back(e.E, std::conj(e.E));
    rec.zero_records.push_back(zero_record(e.lambda));
    rec.pair_residuals.push_back(rec.zero_records.back().newton_residual);
  }
}

}  // namespace

SweepRecord solve_record(int M, int level, double eps, double E_max, const SweepConfig& cfg,
                         const SweepRecord* warm) {
  SweepRecord rec;
  rec.M = M;
  rec.level = level;
  rec.eps = eps;
  rec.m = 2.0 * M + eps;
  rec.E_max = E_max;
  SpectralParams p;
  try {
    p = make_params(M, eps, level, level != M);
  } catch (const DomainError& e) {
    rec.gap = rec.m == 2.0;
    rec.error = e.what();
    return rec;
  }
  try {
    fill_tracked(rec, p, cfg, warm != nullptr && warm->error.empty() ? warm : nullptr);
    classify(rec, p, cfg);
  } catch (const Error& e) {
    rec.error = e.what();
  }
  return rec;
}

std::vector<SweepRecord> sweep_eps(int M, int level, double eps_from, double eps_to, double step,
                                   double E_max, const SweepConfig& cfg) {
  if (!(step > 0.0)) throw DomainError("sweep step must be positive");
  if (!(E_max > 0.0)) throw DomainError("E_max must be positive");
  const double dir = eps_to >= eps_from ? 1.0 : -1.0;
  const int n = static_cast<int>(std::floor(std::abs(eps_to - eps_from) / step + 1e-9));
  std::vector<SweepRecord> out;
  out.reserve(n + 1);
  const SweepRecord* warm = nullptr;
  for (int i = 0; i <= n; ++i) {
    double eps = eps_from + dir * i * step;
    if (std::abs(eps) < 1e-9 * step) eps = 0.0;
    out.push_back(solve_record(M, level, eps, E_max, cfg, warm));
    if (out.back().error.empty()) warm = &out.back();
  }
  return out;
}

namespace {

struct Counts {
  std::vector<double> reals;
  std::vector<cplx> pairs;
};

// Moduli at or above cut are ignored on both sides; the cut sits in the widest
// empty band of [0.7, 1] E_max so that no eigenvalue crosses it between the two records.
double choose_cut(const SweepRecord& a, const SweepRecord& b) {
  const double lo = 0.7 * std::min(a.E_max, b.E_max), hi = std::min(a.E_max, b.E_max);
  std::vector<double> v = {lo, hi};
  for (const SweepRecord* r : {&a, &b}) {
    for (double e : r->real_eigs)
      if (std::abs(e) > lo && std::abs(e) < hi) v.push_back(std::abs(e));
    for (const auto& pr : r->complex_pairs)
      if (std::abs(pr.first) > lo && std::abs(pr.first) < hi) v.push_back(std::abs(pr.first));
  }
  std::sort(v.begin(), v.end());
  double best = 0.0, cut = hi;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] - v[i - 1] > best) {
      best = v[i] - v[i - 1];
      cut = 0.5 * (v[i] + v[i - 1]);
    }
  return cut;
}

Counts below(const SweepRecord& r, double cut) {
  Counts c;
  for (double e : r.real_eigs)
    if (std::abs(e) < cut) c.reals.push_back(e);
  for (const auto& pr : r.complex_pairs)
    if (std::abs(pr.first) < cut) c.pairs.push_back(pr.first);
  return c;
}

// Trims the t largest moduli of v if all of them lie in the upper half of the cut.
template <class T>
bool trim_top(std::vector<T>& v, int t, double cut) {
  if (t > int(v.size())) return false;
  std::sort(v.begin(), v.end(), [](const T& x, const T& y) { return std::abs(x) < std::abs(y); });
  for (int i = 0; i < t; ++i)
    if (std::abs(v[v.size() - 1 - i]) < 0.5 * cut) return false;
  v.resize(v.size() - t);
  return true;
}

struct MergeFit {
  int merges = -1;  // -1: nothing fits
  int crossings = 0;
};

// Merges from `real_side` to `complex_side`, each turning two reals into a pair.
// What the merges do not explain must be eigenvalues crossing the cut near the
// top; the fit with the fewest crossings wins and those are trimmed off.
MergeFit merge_count(Counts& real_side, Counts& complex_side, double cut) {
  const int dr = int(real_side.reals.size()) - int(complex_side.reals.size());
  const int dp = int(complex_side.pairs.size()) - int(real_side.pairs.size());
  MergeFit best;
  for (int k = 0; 2 * k <= int(real_side.reals.size()); ++k) {
    const int cr = dr - 2 * k, cp = dp - k;
    Counts a = real_side, b = complex_side;
    if (!trim_top(cr > 0 ? a.reals : b.reals, std::abs(cr), cut)) continue;
    if (!trim_top(cp > 0 ? b.pairs : a.pairs, std::abs(cp), cut)) continue;
    if (best.merges < 0 || std::abs(cr) + std::abs(cp) < best.crossings) best = {k, std::abs(cr) + std::abs(cp)};
  }
  if (best.merges >= 0) {
    const int cr = dr - 2 * best.merges, cp = dp - best.merges;
    trim_top(cr > 0 ? real_side.reals : complex_side.reals, std::abs(cr), cut);
    trim_top(cp > 0 ? complex_side.pairs : real_side.pairs, std::abs(cp), cut);
  }
  return best;
}

// Align a (sorted) to b by deleting adjacent pairs of a; returns the first
// index of each deleted pair.
std::vector<int> deleted_pairs(const std::vector<double>& a, const std::vector<double>& b) {
  const int n = int(a.size()), k = int(b.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> dp(n + 1, std::vector<double>(k + 1, inf));
  std::vector<std::vector<char>> how(n + 1, std::vector<char>(k + 1, 0));
  dp[0][0] = 0.0;
  for (int i = 1; i <= n; ++i)
    for (int j = 0; j <= k; ++j) {
      if (j >= 1 && dp[i - 1][j - 1] + std::abs(a[i - 1] - b[j - 1]) < dp[i][j]) {
        dp[i][j] = dp[i - 1][j - 1] + std::abs(a[i - 1] - b[j - 1]);
        how[i][j] = 'm';
      }
      if (i >= 2 && dp[i - 2][j] < dp[i][j]) {
        dp[i][j] = dp[i - 2][j];
        how[i][j] = 'd';
      }
    }
  std::vector<int> out;
  for (int i = n, j = k; i > 0;) {
    if (how[i][j] == 'd') {
      out.push_back(i - 2);
      i -= 2;
    } else {
      --i;
      --j;
    }
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<MergeEvent> events_between(const SweepRecord& real_side, double complex_eps, const Counts& a,
                                       const Counts& b, double cut, int k) {
  std::vector<MergeEvent> out;
  std::vector<cplx> fresh = b.pairs;
  for (const cplx& z : a.pairs) {  // pairs present on both sides are not new
    auto it = std::min_element(fresh.begin(), fresh.end(),
                               [&](cplx x, cplx y) { return std::abs(x - z) < std::abs(y - z); });
    if (it != fresh.end()) fresh.erase(it);
  }
  for (int i : deleted_pairs(a.reals, b.reals)) {
    MergeEvent ev;
    ev.eps_interval = {real_side.eps, complex_eps};
    // indices into real_eigs: the reals below the cut are a prefix-free subset in sorted order
    int idx = 0, seen = -1;
    for (std::size_t t = 0; t < real_side.real_eigs.size(); ++t)
      if (std::abs(real_side.real_eigs[t]) < cut && ++seen == i) {
        idx = int(t);
        break;
      }
    ev.eig_indices = {idx, idx + 1};
    ev.last_real_values = {a.reals[i], a.reals[i + 1]};
    const double mid = 0.5 * (a.reals[i] + a.reals[i + 1]);
    auto best = std::min_element(fresh.begin(), fresh.end(), [&](cplx x, cplx y) {
      return std::abs(x.real() - mid) < std::abs(y.real() - mid);
    });
    if (best != fresh.end()) {
      ev.pair_value = *best;
      fresh.erase(best);
    }
    out.push_back(ev);
  }
  if (int(out.size()) != k) throw UnresolvedTransition("merge alignment did not find the expected pairs");
  return out;
}

void resolve(const SweepRecord& hi, const SweepRecord& lo, int depth, const SweepConfig& cfg,
             std::vector<MergeEvent>& out) {
  const double cut = choose_cut(hi, lo);
  const Counts ch = below(hi, cut), cl = below(lo, cut);
  if (ch.reals.size() == cl.reals.size() && ch.pairs.size() == cl.pairs.size()) return;
  if (depth > 0) {
    double e = 0.5 * (hi.eps + lo.eps);
    if (hi.M == 1 && e == 0.0) e = 0.25 * hi.eps + 0.75 * lo.eps;  // m = 2 has no record
    const SweepRecord mid = solve_record(hi.M, hi.level, e, hi.E_max, cfg, &hi);
    if (mid.error.empty() && !mid.gap) {
      resolve(hi, mid, depth - 1, cfg, out);
      resolve(mid, lo, depth - 1, cfg, out);
      return;
    }
  }
  Counts dh = ch, dl = cl, uh = ch, ul = cl;
  const MergeFit down = merge_count(dh, dl, cut), up = merge_count(ul, uh, cut);
  const bool use_down = down.merges >= 0 && (up.merges < 0 || down.crossings <= up.crossings);
  if (use_down && down.merges == 0) return;  // only crossings of the cut
  if (!use_down && up.merges == 0) return;
  if (use_down) {
    for (const MergeEvent& ev : events_between(hi, lo.eps, dh, dl, cut, down.merges)) out.push_back(ev);
  } else if (up.merges > 0) {
    for (const MergeEvent& ev : events_between(lo, hi.eps, ul, uh, cut, up.merges)) out.push_back(ev);
  } else {
    std::ostringstream msg;
    msg << "eps " << hi.eps << " -> " << lo.eps << ": real " << ch.reals.size() << " -> " << cl.reals.size()
        << ", pairs " << ch.pairs.size() << " -> " << cl.pairs.size();
    throw UnresolvedTransition(msg.str());
  }
}

}  // namespace

std::vector<MergeEvent> detect_merges(std::vector<SweepRecord> records, const SweepConfig& cfg) {
  std::vector<SweepRecord> usable;
  for (SweepRecord& r : records)
    if (r.error.empty() && !r.gap) usable.push_back(std::move(r));
  std::sort(usable.begin(), usable.end(), [](const SweepRecord& a, const SweepRecord& b) { return a.eps > b.eps; });
  std::vector<MergeEvent> out;
  for (std::size_t i = 1; i < usable.size(); ++i) resolve(usable[i - 1], usable[i], cfg.merge_refine_depth, cfg, out);
  return out;
}

AccumulationReport accumulation_check(const SpectralParams& p, const AccumulationConfig& cfg, int count) {
  const bool in_range = p.M == 1 ? (p.eps > -1.0 && p.eps < 0.0)
                                 : (p.eps > -3.0 && p.eps < 0.0 && p.eps != -1.0 && p.eps != -2.0);
  if (!in_range || p.M != p.level) throw DomainError("accumulation_check needs non-integer eps < 0 with 2M + eps in the accumulation range");
  if (count < 4) throw DomainError("accumulation_check needs count >= 4");

  const EigenMap& map = calibrated_map(p.M, cfg.sweep.integ);
  const double target = accumulation_angles(p).second;
  // Directions of cancelled numerator zeros in the upper half plane.
  const double ray = p.level == 1 ? kPi : kPi - 2.0 * kPi / (p.m + 2.0);
  const double th_lo = 0.005, th_hi = 0.5 * (target + ray);
  const AnalyticFn num = make_func(numerator_id(p.level), p, cfg.sweep.integ);

  double r0 = cfg.r_start > 0 ? cfg.r_start : (p.level == 1 ? 4.0 : 20.0);
  const double r_max = cfg.r_max > 0 ? cfg.r_max : (p.level == 1 ? 80.0 : 1100.0);
  std::vector<cplx> string;
  while (string.size() < 2 && r0 < r_max) {
    for (const ZeroRecord& r : search_zeros(num, Region::sector(r0, 1.5 * r0, th_lo, th_hi), numerator_id(p.level),
                                            cfg.sweep.zeros)
                                   .records)
      string.push_back(r.location);
    r0 *= 1.5;
  }
  std::sort(string.begin(), string.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
  if (string.size() < 2) throw InsufficientZeros("no complex eigenvalues found in the start annuli");

  while (std::abs(string.back()) < r_max) {
    const cplx a = string[string.size() - 2], b = string.back();
    const double h = std::abs(b - a);
    cplx z;
    try {
      z = polish_zero(num, 2.0 * b - a, 0.5 * h, cfg.sweep.zeros);
    } catch (const InversionFailure&) {
      break;
    }
    const double step = std::abs(z - b);
    if (!(std::abs(z) > std::abs(b)) || step < 0.5 * h || step > 2.0 * h) break;
    string.push_back(z);
  }

  AccumulationReport rep;
  rep.target = target;
  rep.marched = int(string.size());
  if (int(string.size()) < count)
    throw InsufficientZeros("found " + std::to_string(string.size()) + " eigenvalues, need " + std::to_string(count));
  const std::vector<cplx> last(string.end() - count, string.end());
  for (const cplx& z : last) {
    cplx E = map.E_of_lambda(z);
    if (E.imag() < 0) E = std::conj(E);
    rep.eigenvalues.push_back(E);
    rep.deviations.push_back(target - std::arg(E));
  }
  rep.decreasing = true;
  for (int i = count - 3; i < count; ++i)
    if (!(std::abs(rep.deviations[i]) < std::abs(rep.deviations[i - 1]))) rep.decreasing = false;
  rep.final_deviation = std::abs(rep.deviations.back());
  rep.slow_approach = rep.final_deviation > cfg.tolerance;

  // The window holding the reported zeros must contain nothing else.
  const double s_in = std::abs(last[1] - last[0]), s_out = std::abs(last[count - 1] - last[count - 2]);
  try {
    const Region win = Region::sector(std::abs(last.front()) - 0.5 * s_in, std::abs(last.back()) + 0.5 * s_out,
                                      th_lo, th_hi);
    rep.verified = winding_count(num, win, cfg.sweep.zeros.samples_per_side, cfg.sweep.zeros) == count;
  } catch (const BoundaryZeroSuspected&) {
    rep.verified = false;
  }
  return rep;
}

namespace {

std::string num17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string records_csv(const std::vector<SweepRecord>& records) {
  std::ostringstream os;
  os << "eps,m,kind,re_E,im_E,residual\n";
  for (const SweepRecord& r : records) {
    const std::string head = num17(r.eps) + "," + num17(r.m) + ",";
    if (r.gap || !r.error.empty()) {
      os << head << (r.gap ? "gap" : "error") << ",,,\n";
      continue;
    }
    for (std::size_t i = 0; i < r.real_eigs.size(); ++i)
      os << head << "real," << num17(r.real_eigs[i]) << ",0," << num17(r.real_residuals[i]) << "\n";
    for (std::size_t i = 0; i < r.complex_pairs.size(); ++i)
      os << head << "pair," << num17(r.complex_pairs[i].first.real()) << ","
         << num17(r.complex_pairs[i].first.imag()) << "," << num17(r.pair_residuals[i]) << "\n";
  }
  return os.str();
}

std::string sweep_json(const std::vector<SweepRecord>& records, const std::vector<MergeEvent>& merges) {
  using nlohmann::ordered_json;
  ordered_json j;
  ordered_json recs = ordered_json::array();
  for (const SweepRecord& r : records) {
    ordered_json o;
    o["eps"] = r.eps;
    o["m"] = r.m;
    o["E_max"] = r.E_max;
    o["gap"] = r.gap;
    o["error"] = r.error;
    o["real_count"] = r.real_eigs.size();
    o["pair_count"] = r.complex_pairs.size();
    o["winding"] = r.winding;
    o["verified"] = r.verified;
    o["real_eigs"] = r.real_eigs;
    ordered_json pairs = ordered_json::array();
    for (const auto& pr : r.complex_pairs) pairs.push_back({pr.first.real(), pr.first.imag()});
    o["pairs"] = pairs;
    recs.push_back(o);
  }
  j["records"] = recs;
  ordered_json ms = ordered_json::array();
  for (const MergeEvent& e : merges) {
    ordered_json o;
    o["eps_real"] = e.eps_interval.first;
    o["eps_complex"] = e.eps_interval.second;
    o["indices"] = {e.eig_indices.first, e.eig_indices.second};
    o["last_real_values"] = {e.last_real_values.first, e.last_real_values.second};
    o["pair"] = {e.pair_value.real(), e.pair_value.imag()};
    ms.push_back(o);
  }
  j["merges"] = ms;
  return j.dump(2);
}

}  // namespace ptspec
