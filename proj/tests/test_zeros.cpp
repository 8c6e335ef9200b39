#include <doctest.h>

#include <cmath>

#include "ptspec/asym.hpp"
#include "ptspec/errors.hpp"
#include "ptspec/zeros.hpp"

using namespace ptspec;

namespace {

AnalyticFn poly(std::vector<cplx> roots) {
  return [roots](cplx z) {
    LogValue v = LogValue::one();
    for (const cplx& r : roots) v = v * LogValue::from_complex(z - r);
    return v;
  };
}

}  // namespace

TEST_CASE("winding of polynomials on a square") {
  const Region sq = Region::rect({-1, -1}, {1, 1});
  CHECK(winding_count(poly({0.0}), sq) == 1);
  CHECK(winding_count(poly({{0.3, 0.2}, {-0.4, 0.1}}), sq) == 2);
  CHECK(winding_count(poly({{0.3, 0.2}, {1.5, 0.1}, {-3.0, 0.0}}), sq) == 1);
  CHECK(winding_count(poly({{2.0, 0.0}}), sq) == 0);
}

TEST_CASE("winding over a disk contour") {
  const auto fn = poly({{0.3, 0.2}, {-0.4, 0.1}, {0.0, -2.0}});
  CHECK(winding_count(fn, Region::disk(0.0, 0.35)) == 0);
  CHECK(winding_count(fn, Region::disk(0.0, 0.5)) == 2);
  CHECK(winding_count(fn, Region::disk({0.0, -1.0}, 1.5)) == 3);
}

TEST_CASE("fast-rotating phase is resolved, not aliased") {
  // exp(40 i z) adds 80 rad of phase along each horizontal edge.
  const auto base = poly({{0.1, 0.0}, {-0.2, 0.3}});
  const AnalyticFn fn = [&](cplx z) { return base(z) * LogValue::from_log({0.0, 40.0 * z.real()}); };
  CHECK(winding_count(fn, Region::rect({-1, -1}, {1, 1})) == 2);
}

TEST_CASE("search_zeros locates polynomial roots") {
  const std::vector<cplx> roots = {{0.5, 0.5}, {-0.7, 0.2}, {0.1, -0.8}, {-0.2, -0.3}, {0.9, -0.1}};
  const auto s = search_zeros(poly(roots), Region::rect({-1, -1}, {1.2, 1.1}), FuncId::Other);
  CHECK(s.total_winding == 5);
  REQUIRE(s.records.size() == 5);
  CHECK(s.unresolved.empty());
  for (const cplx& r : roots) {
    double best = HUGE_VAL;
    for (const auto& rec : s.records) best = std::min(best, std::abs(rec.location - r));
    CHECK(best < 1e-12);
  }
  for (const auto& rec : s.records) {
    CHECK(rec.verified);
    CHECK(rec.winding_cell.contains(rec.location));
  }
  for (std::size_t i = 1; i < s.records.size(); ++i)
    CHECK(std::abs(s.records[i - 1].location) <= std::abs(s.records[i].location));
}

TEST_CASE("sector regions") {
  const cplx a = std::polar(2.0, 0.3), b = std::polar(5.0, 1.0), c = std::polar(3.0, -0.5);
  const Region sec = Region::sector(1.0, 10.0, 0.0, 1.5);
  const auto s = search_zeros(poly({a, b, c}), sec);
  REQUIRE(s.records.size() == 2);
  CHECK(std::abs(s.records[0].location - a) < 1e-12);
  CHECK(std::abs(s.records[1].location - b) < 1e-12);
  CHECK(sec.contains(a));
  CHECK(!sec.contains(c));
  CHECK(Region::sector(1.0, 10.0, 3.0, 3.5).contains(std::polar(2.0, -3.0)));
}

TEST_CASE("a zero on the boundary is handled by perturbing the region") {
  const auto s = search_zeros(poly({{1.0, 0.0}}), Region::rect({0.0, -1.0}, {1.0, 1.0}));
  CHECK(s.total_winding == 1);
  REQUIRE(s.records.size() == 1);
  CHECK(std::abs(s.records[0].location - 1.0) < 1e-12);
}

TEST_CASE("cell budget and Newton failures raise") {
  std::vector<cplx> many;
  for (int i = 0; i < 30; ++i) many.push_back({-0.9 + 0.0613 * i, 0.01 * (i % 3)});
  ZeroSearchConfig cfg;
  cfg.max_cells = 5;
  CHECK_THROWS_AS(search_zeros(poly(many), Region::rect({-1, -1}, {1, 1}), FuncId::Other, cfg),
                  SubdivisionBudgetExceeded);
  const AnalyticFn ex = [](cplx z) { return LogValue::from_log(z); };
  CHECK_THROWS_AS(polish_zero(ex, 0.0, 1.0), InversionFailure);
}

TEST_CASE("find_real_zeros on sin") {
  const AnalyticFn s = [](cplx z) { return LogValue::from_complex(std::sin(z)); };
  const auto z = find_real_zeros(s, 1.0, 10.0, 0.3);
  REQUIRE(z.size() == 3);
  for (int k = 0; k < 3; ++k) CHECK(z[k] == doctest::Approx((k + 1) * kPi).epsilon(1e-14));
}

TEST_CASE("windings of f are additive over a partition") {
  const auto p = params_from_m(1.5);
  const auto f = make_func(FuncId::F, p);
  const int whole = winding_count(f, Region::rect({-20.0, -1.0}, {-1.0, 1.0}));
  const int parts = winding_count(f, Region::rect({-20.0, -1.0}, {-9.3, 0.37})) +
                    winding_count(f, Region::rect({-9.3, -1.0}, {-1.0, 0.37})) +
                    winding_count(f, Region::rect({-20.0, 0.37}, {-9.3, 1.0})) +
                    winding_count(f, Region::rect({-9.3, 0.37}, {-1.0, 1.0}));
  CHECK(whole == 8);
  CHECK(parts == whole);
  CHECK(winding_count(f, Region::rect({0.5, -1.0}, {60.0, 1.0})) == 0);
}

TEST_CASE("zeros of f for m = 1.5 are real and follow the root asymptotics") {
  const auto p = params_from_m(1.5);
  const auto s = search_zeros(make_func(FuncId::F, p), Region::rect({-25.0, -1.5}, {-0.25, 1.5}), FuncId::F);
  CHECK(s.unresolved.empty());
  REQUIRE(s.records.size() == 10);
  const AsymConstants k = asym_constants(p.m);
  double prev_ratio = HUGE_VAL;
  for (std::size_t i = 0; i < s.records.size(); ++i) {
    const int n = int(i) + 1;
    const cplx z = s.records[i].location;
    CAPTURE(n);
    CHECK(std::abs(z.imag()) < 1e-6 * std::abs(z));
    CHECK(s.records[i].verified);
    CHECK(s.records[i].func_id == FuncId::F);
    const double spacing = std::pow(k.a, 1.0 / p.rho) / p.rho * std::pow(double(n), 1.0 / p.rho - 1.0);
    const double ratio = std::abs(z.real() - asr_root(n, p)) / spacing;
    if (n >= 5) {
      CHECK(ratio < prev_ratio);
      CHECK(ratio < 0.05);
    }
    prev_ratio = ratio;
  }
}

TEST_CASE("cancellation pairs for the first zeros of f") {
  const auto rep = cancellation_report(params_from_m(1.5), {}, 5);
  REQUIRE(rep.pairs.size() == 5);
  for (const auto& pr : rep.pairs) {
    CAPTURE(pr.n);
    CHECK(pr.ratio < 1e-6);
    CHECK(std::abs(pr.numerator_zero.imag()) < 1e-8);
  }
  CHECK(rep.unpaired_f.empty());
  CHECK(rep.unpaired_numerator.empty());
}
