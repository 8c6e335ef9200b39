#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ptspec/log_value.hpp"
#include "ptspec/ode.hpp"
#include "ptspec/params.hpp"

namespace ptspec {

using AnalyticFn = std::function<LogValue(cplx)>;

// Rect and Sector regions are rectangles [lo, hi] in a parameter plane w:
// lambda = w for Rect, lambda = exp(w) (w = log r + i theta) for Sector.
// Disk is only a contour (winding_count), not subdivided.
struct Region {
  enum class Kind { Rect, Sector, Disk };
  Kind kind = Kind::Rect;
  cplx lo, hi;        // parameter rectangle
  cplx center;        // Disk
  double radius = 0;  // Disk

  static Region rect(cplx lower_left, cplx upper_right);
  static Region sector(double r_min, double r_max, double theta_min, double theta_max);
  static Region disk(cplx center, double radius);

  cplx to_lambda(cplx w) const;
  bool contains(cplx lambda) const;
  // The part of the parameter rectangle [a, b] as a region of the same kind.
  Region sub(cplx a, cplx b) const;
  std::string describe() const;
};

enum class FuncId { F, NumeratorC, C, NumeratorD, D, Other };
const char* func_name(FuncId id);

struct ZeroSearchConfig {
  int samples_per_side = 16;
  int max_refine_depth = 10;     // bisections of one boundary segment
  double dip_log = 30.0;         // a boundary sample this far below both neighbours is a suspected zero
  int max_cells = 6000;
  double min_cell_rel = 1e-9;    // smallest cell, relative to the region's parameter size
  double reverify_drop = 20.0;   // required logmod drop of |func| at a zero below its cell boundary median
  int newton_max_iter = 40;
  double newton_rel_tol = 1e-13; // Newton stops once a step is below this times max(1, |z|)
  double diff_step_rel = 1e-4;   // central-difference step relative to cell size
  unsigned workers = 0;          // 0: hardware concurrency
};

struct ZeroRecord {
  cplx location;
  double newton_residual = 0.0;  // |func(location)| / boundary median scale of the cell
  double drop = 0.0;             // boundary median logmod - logmod at the zero
  bool verified = false;         // drop >= reverify_drop
  Region winding_cell;
  FuncId func_id = FuncId::Other;
  int cell_id = 0;
};

struct ZeroSearch {
  std::vector<ZeroRecord> records;  // sorted by modulus
  std::vector<Region> unresolved;   // cells of winding > 1 at the size limit, or failed polish
  int total_winding = 0;
  int cells = 0;
  long evaluations = 0;
};

// Winding number of func around the boundary of region.
int winding_count(const AnalyticFn& func, const Region& region, int samples_per_side = 16,
                  const ZeroSearchConfig& cfg = {});

// Quadtree subdivision until each cell has winding <= 1, then Newton polish.
ZeroSearch search_zeros(const AnalyticFn& func, const Region& region, FuncId id = FuncId::Other,
                        const ZeroSearchConfig& cfg = {});

// The first max_zeros records of search_zeros, by modulus.
std::vector<ZeroRecord> find_zeros(const AnalyticFn& func, const Region& region, int max_zeros,
                                   FuncId id = FuncId::Other, const ZeroSearchConfig& cfg = {});

// Newton polish of a zero of func from a start point; throws InversionFailure
// if it does not converge within `radius` of the start.
cplx polish_zero(const AnalyticFn& func, cplx start, double radius, const ZeroSearchConfig& cfg = {});

// Zeros in [lo, hi] of a function real on the real axis (sign changes of the
// real part on a grid of `step`, refined by bracketing).
std::vector<double> find_real_zeros(const AnalyticFn& func, double lo, double hi, double step);

// Standard functions of the problem as AnalyticFn.
AnalyticFn make_func(FuncId id, const SpectralParams& p, const IntegratorConfig& cfg = {});

struct CancellationPair {
  int n = 0;                  // 1-based index of the f zero
  double f_zero = 0.0;        // lambda (negative)
  cplx numerator_zero;        // paired zero of the numerator
  double gap = 0.0;           // |numerator_zero - f_zero|
  double spacing_bound = 0.0; // c2 n^{1/rho - 1}
  double ratio = 0.0;         // gap / spacing_bound
};

struct CancellationReport {
  std::vector<CancellationPair> pairs;
  std::vector<cplx> unpaired_numerator;  // candidate eigenvalues near the negative axis
  std::vector<double> unpaired_f;
  double c2 = 0.0;
  double search_radius = 0.0;
};

// Zeros of f and of the numerator of C near the negative axis, paired greedily.
CancellationReport cancellation_report(const SpectralParams& p, const IntegratorConfig& cfg,
                                       int n_max, const ZeroSearchConfig& zcfg = {});

}  // namespace ptspec
