#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "ptspec/asym.hpp"
#include "ptspec/determinants.hpp"
#include "ptspec/errors.hpp"
#include "ptspec/params.hpp"
#include "ptspec/sibuya.hpp"
#include "ptspec/sweep.hpp"
#include "ptspec/verify.hpp"
#include "ptspec/zeros.hpp"

using namespace ptspec;
using nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  IntegratorConfig integ;
  std::string output;  // empty: stdout
  std::string format = "json";
  unsigned workers = 0;
  std::uint64_t seed = 20240917;
};

struct ParamArgs {
  std::optional<double> m;
  int M = 1;
  double eps = 0.0;
  std::optional<int> level;

  void add(CLI::App* app) {
    app->add_option("--m", m, "exponent m (alternative to --M/--eps)");
    app->add_option("--M", M, "integer M of x^{2M}(ix)^eps");
    app->add_option("--eps", eps, "epsilon");
    app->add_option("--level", level, "1 or 2 (default: M, or 1 with --m)");
  }
  SpectralParams build() const {
    if (m) return params_from_m(*m, level.value_or(1));
    return make_params(M, eps, level.value_or(M), level.has_value() && *level != M);
  }
};

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string serialize(const RunConfig& c) {
  std::ostringstream os;
  os << "rel_tol=" << g17(c.integ.rel_tol) << ";abs_tol=" << g17(c.integ.abs_tol)
     << ";max_steps=" << c.integ.max_steps << ";pole_guard=" << g17(c.integ.pole_guard) << ";format=" << c.format
     << ";workers=" << c.workers << ";seed=" << c.seed;
  return os.str();
}

// FNV-1a, stable across platforms.
std::string config_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ordered_json header(const RunConfig& c, const std::string& command) {
  ordered_json h;
  h["artifact"] = "ptspec";
  h["version"] = kVersion;
  h["command"] = command;
  h["config"] = serialize(c);
  h["config_hash"] = config_hash(serialize(c));
  return h;
}

std::string csv_header(const RunConfig& c, const std::string& command) {
  return "# ptspec " + std::string(kVersion) + " " + command + " config_hash=" + config_hash(serialize(c)) + " " +
         serialize(c) + "\n";
}

void emit(const RunConfig& c, const std::string& text) {
  if (c.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(c.output);
  if (!out) throw Error("cannot write " + c.output);
  out << text;
}

ordered_json cjson(cplx z) { return ordered_json::array({z.real(), z.imag()}); }

ordered_json lvjson(const LogValue& v) {
  ordered_json o;
  o["logmod"] = v.logmod;
  o["phase"] = v.phase;
  const cplx z = v.to_complex_unchecked();
  if (std::isfinite(z.real()) && std::isfinite(z.imag())) o["value"] = cjson(z);
  return o;
}

ordered_json params_json(const SpectralParams& p) {
  ordered_json o;
  o["M"] = p.M;
  o["eps"] = p.eps;
  o["level"] = p.level;
  o["m"] = p.m;
  o["rho"] = p.rho;
  o["omega"] = cjson(p.omega);
  const auto a = accumulation_angles(p);
  o["angles"] = {a.first, a.second};
  return o;
}

FuncId parse_func(const std::string& s) {
  if (s == "f") return FuncId::F;
  if (s == "numC") return FuncId::NumeratorC;
  if (s == "C") return FuncId::C;
  if (s == "numD") return FuncId::NumeratorD;
  if (s == "D") return FuncId::D;
  throw CLI::ValidationError("--func", "one of f, numC, C, numD, D");
}

ordered_json eigen_map_json(int M, const IntegratorConfig& integ) {
  const EigenMap& map = calibrated_map(M, integ);
  ordered_json o;
  o["sign"] = map.sign;
  o["match_error"] = map.match_error;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral determinants and eigenvalues of -w'' + x^{2M}(ix)^eps w = E w"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; flags override it");
  RunConfig rc;
  app.add_option("--rel-tol", rc.integ.rel_tol, "integrator relative tolerance");
  app.add_option("--abs-tol", rc.integ.abs_tol, "integrator absolute tolerance");
  app.add_option("--max-steps", rc.integ.max_steps, "integrator step budget");
  app.add_option("--pole-guard", rc.integ.pole_guard, "Riccati divergence guard");
  app.add_option("--output,-o", rc.output, "output file (default stdout)");
  app.add_option("--format", rc.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--workers", rc.workers, "worker threads for zero searches (0: all cores)");
  app.add_option("--seed", rc.seed, "seed of random property checks");

  ParamArgs pa_params, pa_f, pa_det, pa_zeros, pa_asym;

  auto* c_params = app.add_subcommand("params", "derived constants of (M, eps, level)");
  pa_params.add(c_params);

  auto* c_f = app.add_subcommand("eval-f", "f(lambda) = y0(0, lambda) and y0'(0, lambda)");
  pa_f.add(c_f);
  double re = 0.0, im = 0.0;
  int rotate = 0;
  c_f->add_option("--re", re, "Re lambda")->required();
  c_f->add_option("--im", im, "Im lambda");
  c_f->add_option("--rotate", rotate, "evaluate f(omega^{2k} lambda) with this k");

  auto* c_det = app.add_subcommand("det", "spectral determinant C (level 1) or D (level 2)");
  pa_det.add(c_det);
  c_det->add_option("--re", re, "Re lambda")->required();
  c_det->add_option("--im", im, "Im lambda");

  auto* c_zeros = app.add_subcommand("zeros", "zeros in a rectangle or sector by the argument principle");
  pa_zeros.add(c_zeros);
  std::string func = "f";
  std::vector<double> rect, sect;
  int cancel_n = 0;
  c_zeros->add_option("--func", func, "f, numC, C, numD or D");
  c_zeros->add_option("--rect", rect, "x0 y0 x1 y1")->expected(4);
  c_zeros->add_option("--sector", sect, "r_min r_max theta_min theta_max")->expected(4);
  c_zeros->add_option("--cancellation", cancel_n, "report pairing of the first N zeros of f (level 1)");

  auto* c_sweep = app.add_subcommand("sweep", "eigenvalues along an eps grid");
  int sw_M = 1;
  std::optional<int> sw_level;
  double sw_from = 0.9, sw_to = -0.9, sw_step = 0.1, sw_emax = 30.0;
  bool sw_merges = false;
  int sw_depth = 1;
  c_sweep->add_option("--M", sw_M, "integer M");
  c_sweep->add_option("--level", sw_level, "1 or 2 (default M)");
  c_sweep->add_option("--from", sw_from, "first eps");
  c_sweep->add_option("--to", sw_to, "last eps");
  c_sweep->add_option("--step", sw_step, "eps step");
  c_sweep->add_option("--emax", sw_emax, "largest |E|");
  c_sweep->add_flag("--merges", sw_merges, "detect merge events (JSON output)");
  c_sweep->add_option("--refine", sw_depth, "bisections per merge interval");

  auto* c_asym = app.add_subcommand("asym", "asymptotic constants and the F(0, mu) fit");
  pa_asym.add(c_asym);
  bool fit = false;
  c_asym->add_flag("--fit", fit, "fit F(0, mu) from Picard samples on mu in [20, 5000]");

  auto* c_verify = app.add_subcommand("verify", "acceptance suite, one pass/fail line per criterion");
  std::string suite = "quick", out_dir = ".";
  std::vector<int> only;
  c_verify->add_option("--suite", suite, "quick or full")->check(CLI::IsMember({"quick", "full"}));
  c_verify->add_option("--out-dir", out_dir, "directory for sweep artifacts");
  c_verify->add_option("--only", only, "criterion ids to run")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    ZeroSearchConfig zcfg;
    zcfg.workers = rc.workers;
    if (c_params->parsed()) {
      ordered_json j = header(rc, "params");
      j["params"] = params_json(pa_params.build());
      emit(rc, j.dump(2) + "\n");
    } else if (c_f->parsed()) {
      const SpectralParams p = pa_f.build();
      const FValue v = eval_f_rotated(rotate, cplx(re, im), p, rc.integ);
      ordered_json j = header(rc, "eval-f");
      j["params"] = params_json(p);
      j["lambda"] = cjson({re, im});
      j["rotate"] = rotate;
      j["f"] = lvjson(v.f);
      j["f1"] = lvjson(v.f1);
      j["ray_angle"] = v.ray_angle;
      j["est_error"] = v.est_error;
      emit(rc, j.dump(2) + "\n");
    } else if (c_det->parsed()) {
      const SpectralParams p = pa_det.build();
      ordered_json j = header(rc, "det");
      j["params"] = params_json(p);
      j["eigen_map"] = eigen_map_json(p.M, rc.integ);
      const DetValue d = eval_det(cplx(re, im), p, rc.integ);
      j["lambda"] = cjson({re, im});
      j["value"] = lvjson(d.value);
      j["numerator"] = lvjson(d.numerator);
      j["denominator"] = lvjson(d.denominator);
      j["flags"] = d.flags;
      j["est_error"] = d.est_error;
      emit(rc, j.dump(2) + "\n");
    } else if (c_zeros->parsed()) {
      const SpectralParams p = pa_zeros.build();
      if (cancel_n > 0) {
        const CancellationReport rep = cancellation_report(p, rc.integ, cancel_n, zcfg);
        ordered_json j = header(rc, "zeros --cancellation");
        j["params"] = params_json(p);
        ordered_json pairs = ordered_json::array();
        for (const auto& pr : rep.pairs)
          pairs.push_back({{"n", pr.n}, {"f_zero", pr.f_zero}, {"numerator_zero", cjson(pr.numerator_zero)},
                           {"gap", pr.gap}, {"ratio", pr.ratio}});
        j["pairs"] = pairs;
        ordered_json un = ordered_json::array();
        for (const cplx& z : rep.unpaired_numerator) un.push_back(cjson(z));
        j["unpaired_numerator"] = un;
        j["unpaired_f"] = rep.unpaired_f;
        emit(rc, j.dump(2) + "\n");
        return 0;
      }
      if (rect.empty() == sect.empty()) throw CLI::ValidationError("zeros", "give exactly one of --rect, --sector");
      const Region region = !rect.empty() ? Region::rect({rect[0], rect[1]}, {rect[2], rect[3]})
                                          : Region::sector(sect[0], sect[1], sect[2], sect[3]);
      const FuncId id = parse_func(func);
      if (id != FuncId::F) (void)calibrated_map(p.M, rc.integ);
      const ZeroSearch s = search_zeros(make_func(id, p, rc.integ), region, id, zcfg);
      if (rc.format == "csv") {
        std::ostringstream os;
        os << csv_header(rc, "zeros") << "func,re,im,residual,drop,verified\n";
        for (const auto& r : s.records)
          os << func_name(id) << "," << g17(r.location.real()) << "," << g17(r.location.imag()) << ","
             << g17(r.newton_residual) << "," << g17(r.drop) << "," << (r.verified ? 1 : 0) << "\n";
        emit(rc, os.str());
      } else {
        ordered_json j = header(rc, "zeros");
        j["params"] = params_json(p);
        j["region"] = region.describe();
        j["total_winding"] = s.total_winding;
        ordered_json zs = ordered_json::array();
        for (const auto& r : s.records)
          zs.push_back({{"lambda", cjson(r.location)}, {"residual", r.newton_residual}, {"drop", r.drop},
                        {"verified", r.verified}});
        j["zeros"] = zs;
        j["unresolved"] = s.unresolved.size();
        emit(rc, j.dump(2) + "\n");
      }
    } else if (c_sweep->parsed()) {
      SweepConfig cfg;
      cfg.integ = rc.integ;
      cfg.zeros = zcfg;
      cfg.merge_refine_depth = sw_depth;
      const int level = sw_level.value_or(sw_M);
      (void)calibrated_map(sw_M, rc.integ);
      const auto recs = sweep_eps(sw_M, level, sw_from, sw_to, sw_step, sw_emax, cfg);
      std::vector<MergeEvent> merges;
      if (sw_merges) merges = detect_merges(recs, cfg);
      if (rc.format == "csv") {
        emit(rc, csv_header(rc, "sweep") + records_csv(recs));
      } else {
        ordered_json j = header(rc, "sweep");
        j["eigen_map"] = eigen_map_json(sw_M, rc.integ);
        j["sweep"] = ordered_json::parse(sweep_json(recs, merges));
        emit(rc, j.dump(2) + "\n");
      }
    } else if (c_asym->parsed()) {
      const SpectralParams p = pa_asym.build();
      const AsymConstants k = asym_constants(p.m);
      ordered_json j = header(rc, "asym");
      j["m"] = p.m;
      j["rho"] = k.rho;
      j["K_m"] = k.K_m;
      j["c1"] = k.c1;
      j["a"] = k.a;
      j["b"] = k.b;
      j["g_integral"] = g_integral(p.m);
      j["watson_ratio_mu_1000"] = watson_check(1000.0, p.m);
      if (fit) {
        std::vector<double> mu, f0;
        for (int i = 0; i < 40; ++i) {
          mu.push_back(20.0 * std::pow(250.0, i / 39.0));
          f0.push_back(picard_F0(mu.back(), p.m));
        }
        const bool integer = std::abs(p.m - std::round(p.m)) < 1e-12;
        const PsiFit fixed = psi_fit(mu, f0, integer ? 6 : 5, p.m, 0.0);
        ordered_json fj;
        fj["int_coeffs"] = fixed.int_coeffs;
        fj["exponent"] = fixed.nonint_exponent;
        fj["coefficient"] = fixed.nonint_coeff;
        fj["log_term"] = fixed.log_term;
        fj["residual"] = fixed.fit_residual;
        if (!integer) fj["free_exponent"] = psi_fit(mu, f0, 5, p.m - 0.5, p.m + 0.5).nonint_exponent;
        j["psi_fit"] = fj;
      }
      emit(rc, j.dump(2) + "\n");
    } else if (c_verify->parsed()) {
      VerifyOptions vo;
      vo.suite = suite;
      vo.seed = rc.seed;
      vo.out_dir = out_dir;
      vo.integ = rc.integ;
      vo.only = only;
      vo.on_result = [](const CriterionResult& r) {
        std::cout << (r.pass ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << " (" << std::round(r.seconds)
                  << " s): " << r.detail << std::endl;
      };
      bool all = true;
      for (const auto& r : run_acceptance(vo)) all = all && r.pass;
      return all ? 0 : 1;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
