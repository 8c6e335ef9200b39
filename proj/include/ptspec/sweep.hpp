#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ptspec/determinants.hpp"
#include "ptspec/ode.hpp"
#include "ptspec/params.hpp"
#include "ptspec/zeros.hpp"

namespace ptspec {

struct SweepConfig {
  IntegratorConfig integ;
  ZeroSearchConfig zeros;
  double reach = 1.1;               // zeros are tracked in |Re|, Im <= reach * E_max
  double below_axis = 0.037;        // the tracked rectangle extends this * E_max under the real axis
  double real_scan_step = 0.25;
  double continuation_step = 0.05;  // eps sub-step when carrying zeros from a neighbouring record
  double real_tol = 1e-6;           // |Im E| < real_tol (1 + |E|) counts as real
  double cancel_tol = 1e-6;         // numerator zero this close (relative) to a denominator zero is cancelled
  int merge_refine_depth = 3;       // bisections of each merge interval
};

struct SweepRecord {
  int M = 1;
  int level = 1;
  double eps = 0.0;
  double m = 0.0;
  double E_max = 0.0;
  std::vector<double> real_eigs;                   // sorted
  std::vector<std::pair<cplx, cplx>> complex_pairs;  // (E, conj E), Im E > 0, sorted by |E|
  std::vector<double> real_residuals;              // |numerator| / largest term at each eigenvalue
  std::vector<double> pair_residuals;
  std::vector<ZeroRecord> zero_records;            // numerator zeros in lambda behind the eigenvalues
  std::vector<cplx> tracked;                       // all numerator zeros in the tracked rectangle
  std::vector<cplx> cancelled;                     // the subset shared with the denominator
  int winding = 0;                                 // over the tracked rectangle
  bool verified = false;                           // winding equals the number of tracked zeros
  bool gap = false;                                // m == 2 (or otherwise outside the domain)
  std::string error;                               // per-eps failure, empty on success
};

struct MergeEvent {
  std::pair<double, double> eps_interval;     // (eps where the pair is real, eps where it is complex)
  std::pair<int, int> eig_indices;            // 0-based positions among the real eigenvalues at .first
  std::pair<double, double> last_real_values;
  cplx pair_value;                            // upper member of the new pair at .second
};

struct AccumulationReport {
  double target = 0.0;             // accumulation angle of arg E
  std::vector<cplx> eigenvalues;   // E in the upper half plane, increasing modulus
  std::vector<double> deviations;  // target - arg E
  bool decreasing = false;         // deviation strictly decreasing over the last four
  double final_deviation = 0.0;
  bool slow_approach = false;      // final deviation above the reporting tolerance
  int marched = 0;                 // zeros visited from the first one to the last
  bool verified = false;           // winding over the window of the reported zeros matches
};

struct AccumulationConfig {
  SweepConfig sweep;
  double r_start = 0.0;    // start annulus [r_start, 1.5 r_start]; 0 chooses from m
  double r_max = 0.0;      // march until |lambda| > r_max; 0 chooses from m
  double tolerance = 0.08;
};

// One record: all eigenvalues with |E| <= E_max for the params of (M, eps).
// `warm` seeds Newton with the zeros of a neighbouring record.
SweepRecord solve_record(int M, int level, double eps, double E_max, const SweepConfig& cfg = {},
                         const SweepRecord* warm = nullptr);

// Records for eps_from, eps_from +- step, ... up to eps_to. Failures are
// recorded per eps; m = 2 is a gap.
std::vector<SweepRecord> sweep_eps(int M, int level, double eps_from, double eps_to, double step,
                                   double E_max, const SweepConfig& cfg = {});

// Real pair -> conjugate pair transitions between neighbouring records, with
// each interval bisected cfg.merge_refine_depth times (new records are solved
// for the midpoints). Throws UnresolvedTransition when the counts change by
// anything other than whole merges.
std::vector<MergeEvent> detect_merges(std::vector<SweepRecord> records, const SweepConfig& cfg = {});

// Complex eigenvalues along the accumulation ray in the upper half plane,
// marched outwards; the last `count` are reported. Throws InsufficientZeros.
AccumulationReport accumulation_check(const SpectralParams& p, const AccumulationConfig& cfg, int count);

// Columns eps, m, kind{real|pair}, re_E, im_E, residual; gaps as kind=gap.
std::string records_csv(const std::vector<SweepRecord>& records);
// Summary with per-record counts and merge events.
std::string sweep_json(const std::vector<SweepRecord>& records, const std::vector<MergeEvent>& merges);

}  // namespace ptspec
