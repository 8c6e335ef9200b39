#include "ptspec/zeros.hpp"

#include <algorithm>
#include <array>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <deque>
#include <map>
#include <mutex>
#include <sstream>

#include "ptspec/asym.hpp"
#include "ptspec/determinants.hpp"
#include "ptspec/errors.hpp"
#include "ptspec/parallel.hpp"
#include "ptspec/sibuya.hpp"

namespace ptspec {

Region Region::rect(cplx lower_left, cplx upper_right) {
  if (!(upper_right.real() > lower_left.real() && upper_right.imag() > lower_left.imag()))
    throw DomainError("rectangle must have positive area");
  Region r;
  r.kind = Kind::Rect;
  r.lo = lower_left;
  r.hi = upper_right;
  return r;
}

Region Region::sector(double r_min, double r_max, double theta_min, double theta_max) {
  if (!(r_min > 0.0 && r_max > r_min && theta_max > theta_min && theta_max - theta_min < 2 * kPi))
    throw DomainError("sector needs 0 < r_min < r_max and 0 < theta span < 2 pi");
  Region r;
  r.kind = Kind::Sector;
  r.lo = {std::log(r_min), theta_min};
  r.hi = {std::log(r_max), theta_max};
  return r;
}

Region Region::disk(cplx center, double radius) {
  if (!(radius > 0.0)) throw DomainError("disk radius must be positive");
  Region r;
  r.kind = Kind::Disk;
  r.center = center;
  r.radius = radius;
  return r;
}

cplx Region::to_lambda(cplx w) const {
  switch (kind) {
    case Kind::Rect:
      return w;
    case Kind::Sector:
      return std::polar(std::exp(w.real()), w.imag());
    case Kind::Disk:
      break;
  }
  return center + std::polar(radius, 2 * kPi * w.real());
}

bool Region::contains(cplx lambda) const {
  switch (kind) {
    case Kind::Rect:
      return lambda.real() >= lo.real() && lambda.real() <= hi.real() &&
             lambda.imag() >= lo.imag() && lambda.imag() <= hi.imag();
    case Kind::Sector: {
      if (lambda == cplx(0.0)) return false;
      const double lr = std::log(std::abs(lambda));
      double th = std::arg(lambda);
      // Bring the angle into [lo, lo + 2 pi).
      while (th < lo.imag()) th += 2 * kPi;
      while (th >= lo.imag() + 2 * kPi) th -= 2 * kPi;
      return lr >= lo.real() && lr <= hi.real() && th <= hi.imag();
    }
    case Kind::Disk:
      break;
  }
  return std::abs(lambda - center) <= radius;
}

Region Region::sub(cplx a, cplx b) const {
  Region r = *this;
  r.lo = a;
  r.hi = b;
  return r;
}

std::string Region::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::Rect:
      os << "rect[" << lo.real() << "," << hi.real() << "]x[" << lo.imag() << "," << hi.imag() << "]";
      break;
    case Kind::Sector:
      os << "sector r[" << std::exp(lo.real()) << "," << std::exp(hi.real()) << "] theta["
         << lo.imag() << "," << hi.imag() << "]";
      break;
    case Kind::Disk:
      os << "disk c=(" << center.real() << "," << center.imag() << ") r=" << radius;
      break;
  }
  return os.str();
}

const char* func_name(FuncId id) {
  switch (id) {
    case FuncId::F: return "f";
    case FuncId::NumeratorC: return "numC";
    case FuncId::C: return "C";
    case FuncId::NumeratorD: return "numD";
    case FuncId::D: return "D";
    case FuncId::Other: break;
  }
  return "other";
}

namespace {

struct KeyLess {
  bool operator()(const cplx& a, const cplx& b) const {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
  }
};

// Memoized evaluation in the parameter plane of a region.
class Evaluator {
 public:
  Evaluator(const AnalyticFn& fn, const Region& region, unsigned workers)
      : fn_(fn), region_(region), workers_(workers) {}

  std::vector<LogValue> batch(const std::vector<cplx>& ws) {
    std::vector<cplx> todo;
    {
      std::lock_guard<std::mutex> lock(mu_);
      for (const cplx& w : ws)
        if (!cache_.count(w) && std::find_if(todo.begin(), todo.end(),
                                             [&](cplx t) { return t == w; }) == todo.end())
          todo.push_back(w);
    }
    if (!todo.empty()) {
      auto vals = parallel_map(todo, [&](cplx w) { return fn_(region_.to_lambda(w)); }, workers_);
      std::lock_guard<std::mutex> lock(mu_);
      for (std::size_t i = 0; i < todo.size(); ++i) cache_.emplace(todo[i], vals[i]);
      count_ += static_cast<long>(todo.size());
    }
    std::vector<LogValue> out;
    out.reserve(ws.size());
    std::lock_guard<std::mutex> lock(mu_);
    for (const cplx& w : ws) out.push_back(cache_.at(w));
    return out;
  }

  long count() const { return count_; }

 private:
  const AnalyticFn& fn_;
  const Region& region_;
  unsigned workers_;
  std::mutex mu_;
  std::map<cplx, LogValue, KeyLess> cache_;
  long count_ = 0;
};

struct Boundary {
  int winding = 0;
  double median_logmod = 0.0;
};

// One straight edge of a parameter rectangle, sampled from its
// lexicographically smaller end so neighbouring cells share samples.
struct Edge {
  cplx from, to;
  bool reversed;  // traversal runs from `to` (canonical end) to `from`
  std::vector<double> t;
  std::vector<LogValue> v;

  cplx point(double s) const {
    const cplx a = reversed ? to : from, b = reversed ? from : to;
    return a + s * (b - a);
  }
};

enum class StepState { Fine, Refine, Must };

// Must: the phase step is too large to trust. Refine: fast modulus change.
StepState step_state(const LogValue& a, const LogValue& b) {
  if (!a.finite() || !b.finite()) return StepState::Must;
  if (std::abs(phase_step(a, b)) >= kPi / 3) return StepState::Must;
  if (std::abs(a.logmod - b.logmod) >= 1.0) return StepState::Refine;
  return StepState::Fine;
}

// Winding along the closed polygon w_0 -> w_1 -> ... -> w_0 in the parameter plane.
// With closed = false the last corner is not joined back to the first (the
// polyline already ends where it starts, as for the circle parameter).
Boundary polygon_winding(Evaluator& ev, const std::vector<cplx>& corners, int samples,
                         const ZeroSearchConfig& cfg, bool closed = true) {
  std::vector<Edge> edges;
  const std::size_t n_edges = closed ? corners.size() : corners.size() - 1;
  for (std::size_t i = 0; i < n_edges; ++i) {
    Edge e;
    e.from = corners[i];
    e.to = corners[(i + 1) % corners.size()];
    e.reversed = KeyLess{}(e.to, e.from);
    for (int k = 0; k <= samples; ++k) e.t.push_back(double(k) / samples);
    edges.push_back(std::move(e));
  }
  auto eval_edges = [&](std::vector<std::pair<int, double>> pts) {
    std::vector<cplx> ws;
    for (auto& [ei, s] : pts) ws.push_back(edges[ei].point(s));
    return ev.batch(ws);
  };
  {
    std::vector<std::pair<int, double>> pts;
    for (int ei = 0; ei < int(edges.size()); ++ei)
      for (double s : edges[ei].t) pts.emplace_back(ei, s);
    const auto vals = eval_edges(pts);
    std::size_t k = 0;
    for (auto& e : edges)
      for (std::size_t j = 0; j < e.t.size(); ++j) e.v.push_back(vals[k++]);
  }
  const double min_dt = 1.0 / (samples * double(1 << cfg.max_refine_depth));
  auto insert = [&](const std::vector<std::pair<int, double>>& pts) {
    const auto vals = eval_edges(pts);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      auto& e = edges[pts[k].first];
      const auto pos = std::lower_bound(e.t.begin(), e.t.end(), pts[k].second) - e.t.begin();
      e.t.insert(e.t.begin() + pos, pts[k].second);
      e.v.insert(e.v.begin() + pos, vals[k]);
    }
  };
  auto refine = [&] {
    for (;;) {
      std::vector<std::pair<int, double>> pts;
      for (int ei = 0; ei < int(edges.size()); ++ei) {
        const auto& e = edges[ei];
        for (std::size_t j = 0; j + 1 < e.t.size(); ++j) {
          const StepState st = step_state(e.v[j], e.v[j + 1]);
          if (st == StepState::Fine) continue;
          const bool at_floor = e.t[j + 1] - e.t[j] <= min_dt * 1.000001;
          if (at_floor && st == StepState::Must)
            throw BoundaryZeroSuspected("phase not resolved on the boundary after refinement");
          if (!at_floor) pts.emplace_back(ei, 0.5 * (e.t[j] + e.t[j + 1]));
        }
      }
      if (pts.empty()) return;
      insert(pts);
    }
  };
  auto sequence = [&] {
    std::vector<LogValue> seq;
    for (auto& e : edges) {
      std::vector<LogValue> vs = e.v;
      if (e.reversed) std::reverse(vs.begin(), vs.end());
      seq.insert(seq.end(), vs.begin(), vs.end() - 1);
    }
    if (!closed) seq.push_back(edges.back().reversed ? edges.back().v.front() : edges.back().v.back());
    return seq;
  };
  auto total_phase = [](const std::vector<LogValue>& seq) {
    double total = 0.0;
    for (std::size_t i = 0; i < seq.size(); ++i) total += phase_step(seq[i], seq[(i + 1) % seq.size()]);
    return static_cast<int>(std::lround(total / (2 * kPi)));
  };
  // Aliased phase steps (close to a multiple of 2 pi) pass the step test, so
  // the winding must survive one uniform halving of every segment.
  refine();
  int winding = total_phase(sequence());
  for (;;) {
    std::vector<std::pair<int, double>> pts;
    for (int ei = 0; ei < int(edges.size()); ++ei) {
      const auto& e = edges[ei];
      for (std::size_t j = 0; j + 1 < e.t.size(); ++j)
        if (e.t[j + 1] - e.t[j] > min_dt * 1.000001) pts.emplace_back(ei, 0.5 * (e.t[j] + e.t[j + 1]));
    }
    if (pts.empty()) break;
    insert(pts);
    refine();
    const int w2 = total_phase(sequence());
    if (w2 == winding) break;
    winding = w2;
  }
  const std::vector<LogValue> seq = sequence();
  const std::size_t n = seq.size();
  std::vector<double> lm;
  for (std::size_t i = 0; i < n; ++i) {
    const LogValue& prev = seq[(i + n - 1) % n];
    const LogValue& next = seq[(i + 1) % n];
    if (seq[i].logmod < std::min(prev.logmod, next.logmod) - cfg.dip_log)
      throw BoundaryZeroSuspected("boundary sample far below its neighbours");
    lm.push_back(seq[i].logmod);
  }
  Boundary b;
  b.winding = winding;
  std::nth_element(lm.begin(), lm.begin() + lm.size() / 2, lm.end());
  b.median_logmod = lm[lm.size() / 2];
  return b;
}

std::vector<cplx> rect_corners(cplx a, cplx b) {
  return {a, {b.real(), a.imag()}, b, {a.real(), b.imag()}};
}

Boundary cell_boundary(Evaluator& ev, const Region& region, cplx a, cplx b, int samples,
                       const ZeroSearchConfig& cfg) {
  if (region.kind == Region::Kind::Disk) {
    // Circle parameter t in [0, 1]; t = 1 is the same point as t = 0.
    return polygon_winding(ev, {0.0, 0.25, 0.5, 0.75, 1.0}, samples, cfg, false);
  }
  return polygon_winding(ev, rect_corners(a, b), samples, cfg);
}

cplx lambda_to_param(const Region& region, cplx lambda) {
  if (region.kind == Region::Kind::Sector) {
    double th = std::arg(lambda);
    while (th < region.lo.imag()) th += 2 * kPi;
    while (th >= region.lo.imag() + 2 * kPi) th -= 2 * kPi;
    return {std::log(std::abs(lambda)), th};
  }
  return lambda;
}

bool param_inside(cplx w, cplx a, cplx b, double slack) {
  const double sx = slack * (b.real() - a.real()), sy = slack * (b.imag() - a.imag());
  return w.real() >= a.real() - sx && w.real() <= b.real() + sx && w.imag() >= a.imag() - sy &&
         w.imag() <= b.imag() + sy;
}

// The region grown by k thousandths of its size on every side.
Region perturbed(const Region& region, int k) {
  Region r = region;
  const double f = 1e-3 * k;
  if (region.kind == Region::Kind::Disk) {
    r.radius *= 1.0 + f;
  } else {
    const cplx d = region.hi - region.lo;
    r.lo -= f * d;
    r.hi += f * d;
  }
  return r;
}

template <class Body>
auto with_perturbation(const Region& region, Body body) {
  for (int k = 0;; ++k) {
    try {
      return body(k == 0 ? region : perturbed(region, k));
    } catch (const BoundaryZeroSuspected&) {
      if (k >= 3) throw;
    }
  }
}

}  // namespace

int winding_count(const AnalyticFn& func, const Region& region, int samples_per_side,
                  const ZeroSearchConfig& cfg) {
  return with_perturbation(region, [&](const Region& r) {
    Evaluator ev(func, r, cfg.workers);
    return cell_boundary(ev, r, r.lo, r.hi, samples_per_side, cfg).winding;
  });
}

cplx polish_zero(const AnalyticFn& func, cplx start, double radius, const ZeroSearchConfig& cfg) {
  const double h = std::max(cfg.diff_step_rel * radius, 1e-12 * std::max(1.0, std::abs(start)));
  cplx z = start, best = start;
  double last = HUGE_VAL, best_log = HUGE_VAL;
  int stale = 0;
  for (int it = 0; it < cfg.newton_max_iter; ++it) {
    const LogValue g = func(z);
    if (g.is_zero()) return z;
    if (g.logmod < best_log) {
      best_log = g.logmod;
      best = z;
      stale = 0;
    } else {
      ++stale;
    }
    const LogValue gp = scale(func(z + h) - func(z - h), 1.0 / (2.0 * h));
    if (gp.is_zero() || !gp.finite()) throw InversionFailure("Newton: vanishing difference quotient");
    cplx step = -(g / gp).to_complex_unchecked();
    if (!std::isfinite(step.real()) || !std::isfinite(step.imag()))
      throw InversionFailure("Newton: non-finite step");
    if (std::abs(step) > 0.5 * radius) step *= 0.5 * radius / std::abs(step);
    z += step;
    if (std::abs(z - start) > radius) throw InversionFailure("Newton left the search disk");
    const double s = std::abs(step), zs = std::max(1.0, std::abs(z));
    if (s <= cfg.newton_rel_tol * zs) return z;
    // Steps no longer shrinking: the iterate wanders in the rounding noise of func.
    if (s >= 0.5 * last && s <= 1e-7 * zs) return best;
    if (stale >= 3 && s <= 1e-3 * radius) return best;
    last = s;
  }
  throw InversionFailure("Newton did not converge");
}

namespace {

ZeroSearch search_in(const AnalyticFn& func, const Region& region, FuncId id,
                     const ZeroSearchConfig& cfg) {
  Evaluator ev(func, region, cfg.workers);
  ZeroSearch out;
  const cplx size = region.hi - region.lo;
  const double min_w = cfg.min_cell_rel * size.real(), min_h = cfg.min_cell_rel * size.imag();

  struct Cell {
    cplx a, b;
    Boundary bd;
    int id;
  };
  std::deque<Cell> queue;
  Cell root{region.lo, region.hi, cell_boundary(ev, region, region.lo, region.hi, cfg.samples_per_side, cfg), 1};
  out.total_winding = root.bd.winding;
  queue.push_back(root);
  int next_id = 2;

  while (!queue.empty()) {
    Cell c = queue.front();
    queue.pop_front();
    if (++out.cells > cfg.max_cells) throw SubdivisionBudgetExceeded("zero search exceeded the cell budget");
    if (c.bd.winding == 0) continue;
    const cplx wa = c.a, wb = c.b;
    const double cw = wb.real() - wa.real(), chh = wb.imag() - wa.imag();
    if (c.bd.winding == 1) {
      const cplx lc = region.to_lambda(0.5 * (wa + wb));
      double rad = 0.0;
      for (const cplx& corner : rect_corners(wa, wb)) rad = std::max(rad, std::abs(region.to_lambda(corner) - lc));
      try {
        const cplx z = polish_zero(func, lc, 1.5 * rad, cfg);
        if (param_inside(lambda_to_param(region, z), wa, wb, 1e-9)) {
          ZeroRecord r;
          r.location = z;
          const LogValue gz = func(z);
          ++out.evaluations;
          r.drop = c.bd.median_logmod - gz.logmod;
          r.newton_residual = std::exp(-std::min(r.drop, 700.0));
          r.verified = r.drop >= cfg.reverify_drop;
          r.winding_cell = region.sub(wa, wb);
          r.func_id = id;
          r.cell_id = c.id;
          out.records.push_back(r);
          continue;
        }
      } catch (const InversionFailure&) {
      }
    }
    if (cw < min_w || chh < min_h) {
      out.unresolved.push_back(region.sub(wa, wb));
      continue;
    }
    // Split off-centre; on trouble with a boundary retry at another fraction.
    static constexpr std::array<double, 8> kFractions = {0.47, 0.53, 0.41, 0.59,
                                                          0.4472136, 0.5527864, 0.381966, 0.618034};
    bool done = false;
    for (double fr : kFractions) {
      const double fx = (c.id % 2) ? fr : 1.0 - fr;
      const double xm = wa.real() + fx * cw, ym = wa.imag() + fr * chh;
      const std::array<std::pair<cplx, cplx>, 4> kids = {{
          {wa, {xm, ym}},
          {{xm, wa.imag()}, {wb.real(), ym}},
          {{wa.real(), ym}, {xm, wb.imag()}},
          {{xm, ym}, wb},
      }};
      try {
        std::vector<Cell> made;
        int sum = 0;
        for (const auto& [ka, kb] : kids) {
          Boundary kbd = cell_boundary(ev, region, ka, kb, cfg.samples_per_side, cfg);
          sum += kbd.winding;
          made.push_back({ka, kb, kbd, 0});
        }
        if (sum != c.bd.winding) continue;
        for (auto& k : made) {
          k.id = next_id++;
          queue.push_back(k);
        }
        done = true;
        break;
      } catch (const BoundaryZeroSuspected&) {
      }
    }
    if (!done) out.unresolved.push_back(region.sub(wa, wb));
  }
  out.evaluations += ev.count();
  std::sort(out.records.begin(), out.records.end(), [](const ZeroRecord& x, const ZeroRecord& y) {
    const double ax = std::abs(x.location), ay = std::abs(y.location);
    if (ax != ay) return ax < ay;
    return KeyLess{}(x.location, y.location);
  });
  return out;
}

}  // namespace

ZeroSearch search_zeros(const AnalyticFn& func, const Region& region, FuncId id,
                        const ZeroSearchConfig& cfg) {
  if (region.kind == Region::Kind::Disk)
    throw DomainError("search_zeros needs a rectangle or sector region");
  return with_perturbation(region, [&](const Region& r) { return search_in(func, r, id, cfg); });
}

std::vector<ZeroRecord> find_zeros(const AnalyticFn& func, const Region& region, int max_zeros,
                                   FuncId id, const ZeroSearchConfig& cfg) {
  auto recs = search_zeros(func, region, id, cfg).records;
  if (max_zeros >= 0 && int(recs.size()) > max_zeros) recs.resize(max_zeros);
  return recs;
}

std::vector<double> find_real_zeros(const AnalyticFn& func, double lo, double hi, double step) {
  auto value = [&](double x) {
    const LogValue v = func(x);
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
          value, xa, xb, va, vb, boost::math::tools::eps_tolerance<double>(50), iters);
      out.push_back(0.5 * (r.first + r.second));
    }
    xa = xb;
    va = vb;
  }
  return out;
}

AnalyticFn make_func(FuncId id, const SpectralParams& p, const IntegratorConfig& cfg) {
  switch (id) {
    case FuncId::F:
      return [p, cfg](cplx l) { return eval_f(l, p, cfg).f; };
    case FuncId::NumeratorC:
      return [p, cfg](cplx l) { return eval_numerator_C(l, p, cfg); };
    case FuncId::C:
      return [p, cfg](cplx l) { return eval_C(l, p, cfg).value; };
    case FuncId::NumeratorD:
      return [p, cfg](cplx l) { return eval_numerator_D(l, p, cfg); };
    case FuncId::D:
      return [p, cfg](cplx l) { return eval_D(l, p, cfg).value; };
    case FuncId::Other:
      break;
  }
  throw DomainError("make_func: no standard function for this id");
}

CancellationReport cancellation_report(const SpectralParams& p, const IntegratorConfig& cfg,
                                       int n_max, const ZeroSearchConfig& zcfg) {
  if (p.level != 1) throw DomainError("cancellation_report needs level 1 parameters");
  if (n_max < 1) throw DomainError("cancellation_report needs n_max >= 1");
  CancellationReport rep;
  const AsymConstants k = asym_constants(p.m);
  const double inv_rho = 1.0 / p.rho;
  rep.c2 = std::pow(k.a, inv_rho) * inv_rho * std::pow(2.0, std::min(0.0, inv_rho - 1.0));

  // Radius reaching past the n_max-th zero by half a spacing.
  const double last = -asr_root(n_max, p);
  const double spacing = rep.c2 * std::pow(double(n_max), inv_rho - 1.0);
  rep.search_radius = last + 0.5 * spacing;
  const double half_height = std::max(0.5, 0.05 * rep.search_radius);
  const Region strip = Region::rect({-rep.search_radius, -half_height}, {-0.25, half_height});

  const auto fz = search_zeros(make_func(FuncId::F, p, cfg), strip, FuncId::F, zcfg).records;
  const auto nz = search_zeros(make_func(FuncId::NumeratorC, p, cfg), strip, FuncId::NumeratorC, zcfg).records;

  // Greedy nearest pairing over all candidate pairs.
  struct Cand {
    double d;
    std::size_t i, j;
  };
  std::vector<Cand> cands;
  for (std::size_t i = 0; i < fz.size(); ++i)
    for (std::size_t j = 0; j < nz.size(); ++j)
      cands.push_back({std::abs(fz[i].location - nz[j].location), i, j});
  std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
    return x.d < y.d || (x.d == y.d && (x.i < y.i || (x.i == y.i && x.j < y.j)));
  });
  std::vector<int> f_pair(fz.size(), -1), n_used(nz.size(), 0);
  for (const auto& c : cands) {
    if (f_pair[c.i] >= 0 || n_used[c.j]) continue;
    f_pair[c.i] = int(c.j);
    n_used[c.j] = 1;
  }
  // f zeros sorted by modulus are f zeros in order along the negative axis.
  for (std::size_t i = 0; i < fz.size(); ++i) {
    if (f_pair[i] < 0) {
      rep.unpaired_f.push_back(fz[i].location.real());
      continue;
    }
    CancellationPair pr;
    pr.n = int(i) + 1;
    pr.f_zero = fz[i].location.real();
    pr.numerator_zero = nz[f_pair[i]].location;
    pr.gap = std::abs(pr.numerator_zero - fz[i].location);
    pr.spacing_bound = rep.c2 * std::pow(double(pr.n), inv_rho - 1.0);
    pr.ratio = pr.gap / pr.spacing_bound;
    rep.pairs.push_back(pr);
  }
  for (std::size_t j = 0; j < nz.size(); ++j)
    if (!n_used[j]) rep.unpaired_numerator.push_back(nz[j].location);
  return rep;
}

}  // namespace ptspec
