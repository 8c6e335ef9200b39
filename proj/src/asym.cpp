#include "ptspec/asym.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <map>
#include <mutex>

#include "ptspec/errors.hpp"

namespace ptspec {

namespace {

void require_m(double m) {
  if (!(m > 1.0) || m == 2.0) throw DomainError("need m > 1, m != 2");
}

// sqrt(t^m + 1) - t^{m/2} (m > 2), with the t^{-m/2}/2 term also removed
// for 1 < m < 2; both written without cancellation.
double km_integrand(double t, double m) {
  const double th = std::pow(t, 0.5 * m);
  const double s = std::sqrt(th * th + 1.0) + th;
  if (m > 2.0) return 1.0 / s;
  return -1.0 / (2.0 * th * s * s);
}

// int_T^inf of the same integrand from the binomial series in u = T^{-m}.
double km_tail(double T, double m) {
  double sum = 0.0, binom = 1.0;  // binom(1/2, k)
  for (int k = 1; k < 200; ++k) {
    binom *= (0.5 - (k - 1)) / k;
    if (m < 2.0 && k == 1) continue;
    const double p = 0.5 * m - m * k;  // exponent of t
    const double term = binom * std::pow(T, p + 1.0) / (-(p + 1.0));
    sum += term;
    if (std::abs(term) < 1e-18 * std::max(1.0, std::abs(sum)) && k > 2) break;
  }
  return sum;
}

// g as a function of the original variable x; Q = x^m + 1. For x > 1 it is
// written in u = x^{-m} so huge x neither overflows nor cancels.
double g_of_x(double x, double m) {
  if (x > 1.0) {
    const double u1 = 1.0 + std::pow(x, -m);
    return std::pow(x, -m - 2.0) * (m * (m - 1.0) / (4.0 * u1 * u1) - 5.0 * m * m / (16.0 * u1 * u1 * u1));
  }
  const double xm2 = std::pow(x, m - 2.0);
  const double q = x * x * xm2 + 1.0, q1 = m * x * xm2, q2 = m * (m - 1.0) * xm2;
  return -(5.0 / 16.0) * q1 * q1 / (q * q * q) + q2 / (4.0 * q * q);
}

// g(Phi(x)) * Phi'(x): the integrand of int g d zeta in x.
double g_dzeta_dx(double x, double m) {
  const double sq = x > 1.0 ? std::pow(x, 0.5 * m) * std::sqrt(1.0 + std::pow(x, -m))
                            : std::sqrt(std::pow(x, m) + 1.0);
  return g_of_x(x, m) * sq;
}

template <class F>
double integrate_half_line(F f) {
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  return ts.integrate(f, 0.0, 1.0, 1e-14) + es.integrate(f, 1.0, std::numeric_limits<double>::infinity(), 1e-14);
}

// Chebyshev-Lobatto panel machinery on [-1, 1]: nodes, integration
// matrix S[j][k] = int_{s_j}^{1} l_k and differentiation matrix.
struct Cheb {
  static constexpr int n = 16;
  std::array<double, n + 1> s{};
  std::array<double, n + 1> bw{};  // barycentric weights
  Eigen::Matrix<double, n + 1, n + 1> S, D;

  Cheb() {
    for (int j = 0; j <= n; ++j) {
      s[j] = -std::cos(kPi * j / n);
      bw[j] = (j % 2 ? -1.0 : 1.0) * ((j == 0 || j == n) ? 0.5 : 1.0);
    }
    for (int k = 0; k <= n; ++k) {
      auto lk = [&](double x) { return lagrange(k, x); };
      for (int j = 0; j <= n; ++j)
        S(j, k) = boost::math::quadrature::gauss<double, 20>::integrate(lk, s[j], 1.0);
    }
    for (int j = 0; j <= n; ++j) {
      double diag = 0.0;
      for (int k = 0; k <= n; ++k) {
        if (k == j) continue;
        D(j, k) = (bw[k] / bw[j]) / (s[j] - s[k]);
        diag -= D(j, k);
      }
      D(j, j) = diag;
    }
  }

  double lagrange(int k, double x) const {
    for (int j = 0; j <= n; ++j)
      if (x == s[j]) return j == k ? 1.0 : 0.0;
    double den = 0.0;
    for (int j = 0; j <= n; ++j) den += bw[j] / (x - s[j]);
    return (bw[k] / (x - s[k])) / den;
  }
};

const Cheb& cheb() {
  static const Cheb c;
  return c;
}

constexpr int kN = Cheb::n + 1;

// zeta panels with x(zeta) and g at the nodes.
struct Grid {
  std::vector<double> a, b;        // panel ends in zeta
  std::vector<double> zeta, g;     // kN nodes per panel
  double eps = 0.0;                // [0, eps] handled analytically
  std::size_t panels() const { return a.size(); }
};

// Phi(x) = sum_k binom(1/2, k) x^{mk+1} / (mk+1), x < 1.
double phi_series(double x, double m) {
  const double xm = std::pow(x, m);
  double sum = 0.0, binom = 1.0, pw = x;
  for (int k = 0; k < 400; ++k) {
    if (k > 0) binom *= (0.5 - (k - 1)) / k;
    const double term = binom * pw / (m * k + 1.0);
    sum += term;
    if (std::abs(term) < 1e-18 * sum) break;
    pw *= xm;
  }
  return sum;
}

double phi_series_inverse(double zeta, double m) {
  double x = zeta;
  for (int it = 0; it < 60; ++it) {
    const double dx = (phi_series(x, m) - zeta) / std::sqrt(std::pow(x, m) + 1.0);
    x -= dx;
    if (std::abs(dx) <= 1e-16 * x) break;
  }
  return x;
}

Grid make_grid(const std::vector<double>& breaks, double m) {
  Grid gr;
  const Cheb& c = cheb();
  gr.eps = breaks.front();
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    gr.a.push_back(breaks[i]);
    gr.b.push_back(breaks[i + 1]);
    const double mid = 0.5 * (breaks[i] + breaks[i + 1]), half = 0.5 * (breaks[i + 1] - breaks[i]);
    for (int j = 0; j < kN; ++j) gr.zeta.push_back(mid + half * c.s[j]);
  }
  // x(zeta): Newton on the convergent series of Phi up to x = 1/2, then
  // dx/dzeta = (x^m + 1)^{-1/2} (smooth there) through the sorted nodes.
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t i = 0; i < gr.zeta.size(); ++i) order.emplace_back(gr.zeta[i], i);
  std::sort(order.begin(), order.end());
  constexpr double x_switch = 0.5;
  const double z_switch = phi_series(x_switch, m);
  std::vector<double> times = {z_switch}, xs;
  std::map<double, double> x_at;
  for (auto& [z, i] : order) {
    if (z <= z_switch) {
      if (!x_at.count(z)) x_at[z] = phi_series_inverse(z, m);
    } else if (z > times.back()) {
      times.push_back(z);
    }
  }
  using State = std::array<double, 1>;
  auto rhs = [m](const State& x, State& dx, double) { dx[0] = 1.0 / std::sqrt(std::pow(x[0], m) + 1.0); };
  namespace ode = boost::numeric::odeint;
  State x0 = {x_switch};
  ode::integrate_times(ode::make_controlled(1e-15, 1e-15, ode::runge_kutta_fehlberg78<State>()), rhs, x0,
                       times.begin(), times.end(), 1e-3,
                       [&](const State& x, double) { xs.push_back(x[0]); });
  for (std::size_t i = 0; i < times.size(); ++i) x_at[times[i]] = xs[i];
  gr.g.resize(gr.zeta.size());
  for (std::size_t i = 0; i < gr.zeta.size(); ++i) gr.g[i] = g_of_x(x_at.at(gr.zeta[i]), m);
  return gr;
}

// Geometric panels down from b0 to about 1e-15 b0, returned ascending.
void push_geometric_down(std::vector<double>& br, double b0) {
  std::vector<double> tmp;
  for (double z = b0; z > 1e-15 * b0; z *= 0.5) tmp.push_back(z);
  br.insert(br.end(), tmp.rbegin(), tmp.rend());
}

void push_uniform(std::vector<double>& br, double to, double width) {
  const double from = br.back();
  const int n = std::max(1, static_cast<int>(std::ceil((to - from) / width)));
  for (int i = 1; i <= n; ++i) br.push_back(from + (to - from) * i / n);
}

void push_ratio(std::vector<double>& br, double to, double ratio) {
  const double from = br.back();
  const int n = std::max(1, static_cast<int>(std::ceil(std::log(to / from) / std::log(ratio))));
  for (int i = 1; i < n; ++i) br.push_back(from * std::pow(to / from, double(i) / n));
  br.push_back(to);
}

// Large-zeta behaviour g ~ gamma2 zeta^{-2}.
double gamma2(double m) { return -m * (m + 4.0) / (4.0 * (m + 2.0) * (m + 2.0)); }

}  // namespace

double compute_Km(double m, double tol) {
  require_m(m);
  const double T = std::pow(100.0, 1.0 / m);  // T^{-m} = 0.01 for the tail series
  boost::math::quadrature::tanh_sinh<double> ts;
  auto f = [m](double t) { return km_integrand(t, m); };
  return ts.integrate(f, 0.0, T, tol) + km_tail(T, m);
}

double beta_fn(double a, double b) {
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

double compute_c1(double m) {
  if (!(m > 1.0)) throw DomainError("compute_c1 needs m > 1");
  return m / 32.0 * beta_fn(2.0 - 1.0 / m, 0.5 + 1.0 / m);
}

AsymConstants asym_constants(double m) {
  require_m(m);
  AsymConstants k;
  k.rho = 0.5 + 1.0 / m;
  k.K_m = compute_Km(m);
  k.c1 = compute_c1(m);
  k.a = kPi / (k.K_m * std::sin(kPi * k.rho));
  k.b = -k.a / 4.0;
  return k;
}

cplx liouville_phi(cplx z, double m) {
  if (!(m > 0.0)) throw DomainError("liouville_phi needs m > 0");
  if (z == cplx(0.0)) return 0.0;
  if (!(std::abs(std::arg(z)) < kPi / m)) throw DomainError("liouville_phi: |arg z| must be below pi/m");
  // zeta = z int_0^1 sqrt((z s)^m + 1) ds, split where |z s| = 1.
  const cplx zm = std::pow(z, m);
  auto f = [&](double s) { return std::sqrt(zm * std::pow(s, m) + 1.0); };
  auto re = [&](double s) { return f(s).real(); };
  auto im = [&](double s) { return f(s).imag(); };
  const double knee = std::min(1.0, 1.0 / std::abs(z));
  // s^m is not smooth at 0: tanh-sinh there, Gauss-Kronrod on the rest.
  boost::math::quadrature::tanh_sinh<double> ts;
  cplx total(ts.integrate(re, 0.0, knee, 1e-15), ts.integrate(im, 0.0, knee, 1e-15));
  if (knee < 1.0) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    total += cplx(GK::integrate(re, knee, 1.0, 15, 1e-15), GK::integrate(im, knee, 1.0, 15, 1e-15));
  }
  return z * total;
}

double liouville_phi_inverse(double zeta, double m) {
  if (!(zeta >= 0.0)) throw DomainError("liouville_phi_inverse needs zeta >= 0");
  if (zeta == 0.0) return 0.0;
  // Phi(x) >= x and Phi(x) >= 2/(m+2) x^{(m+2)/2} bound the root.
  const double hi = std::min(zeta, std::pow(0.5 * (m + 2.0) * zeta, 2.0 / (m + 2.0)));
  auto fn = [&](double x) {
    const double v = liouville_phi(x, m).real() - zeta;
    return std::make_pair(v, std::sqrt(std::pow(x, m) + 1.0));
  };
  boost::uintmax_t iters = 80;
  const double x = boost::math::tools::newton_raphson_iterate(fn, hi, 0.0, hi, 50, iters);
  if (iters >= 80) throw InversionFailure("Phi inversion did not converge");
  return x;
}

double liouville_g(double zeta, double m) {
  if (!(zeta > 0.0)) throw DomainError("liouville_g needs zeta > 0");
  return g_of_x(liouville_phi_inverse(zeta, m), m);
}

double g_integral(double m) {
  if (!(m > 1.0)) throw DomainError("g_integral needs m > 1");
  return integrate_half_line([m](double x) { return g_dzeta_dx(x, m); });
}

double g_norm1(double m) {
  if (!(m > 1.0)) throw DomainError("g_norm1 needs m > 1");
  static std::mutex mu;
  static std::map<double, double> cache;
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(m); it != cache.end()) return it->second;
  }
  // g > 0 near 0 and < 0 at infinity; Q'' Q = (5/4) Q'^2 at the single sign change.
  auto h = [m](double x) { return g_of_x(x, m); };
  const double x_hi = 100.0;
  boost::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(h, 1e-6, x_hi, boost::math::tools::eps_tolerance<double>(52), iters);
  const double x0 = 0.5 * (r.first + r.second);
  auto f = [m](double x) { return std::abs(g_dzeta_dx(x, m)); };
  boost::math::quadrature::tanh_sinh<double> ts;
  boost::math::quadrature::exp_sinh<double> es;
  const double v = ts.integrate(f, 0.0, x0, 1e-14) +
                   es.integrate(f, x0, std::numeric_limits<double>::infinity(), 1e-14);
  std::lock_guard<std::mutex> lock(mu);
  cache[m] = v;
  return v;
}

double picard_F0(double mu, double m, int max_iter) {
  if (!(m > 1.0)) throw DomainError("picard_F0 needs m > 1");
  if (!(mu > 0.0) || !(g_norm1(m) / (2.0 * mu) < 0.5))
    throw NotContractive("picard_F0: ||g||_1 / (2 mu) must be below 0.5");
  const double s = 2.0 * mu;
  const double b0 = std::min(0.5 / mu, 0.5);
  const double z_layer = 100.0 / mu;  // beyond, exp(-s (t - zeta)) is a boundary layer of relative width < 1/200
  const double z_max = 1e8;
  std::vector<double> br;
  push_geometric_down(br, b0);
  push_uniform(br, z_layer, 0.5 / mu);
  push_ratio(br, z_max, 1.25);
  const Grid gr = make_grid(br, m);
  const Cheb& c = cheb();
  const std::size_t np = gr.panels();
  std::vector<double> F(gr.zeta.size(), 1.0), A(F.size()), E(F.size());
  Eigen::Matrix<double, kN, 1> h, w;
  const Eigen::Matrix<double, kN, kN> D2 = c.D * c.D, D3 = D2 * c.D;
  double f0 = 1.0;
  for (int it = 0; it < max_iter; ++it) {
    double a_next = gamma2(m) / z_max;  // int_{z_max}^inf g, F = 1 there
    double e_next = 0.0;
    for (std::size_t p = np; p-- > 0;) {
      const double half = 0.5 * (gr.b[p] - gr.a[p]);
      const std::size_t o = p * kN;
      for (int j = 0; j < kN; ++j) h(j) = gr.g[o + j] * F[o + j];
      const Eigen::Matrix<double, kN, 1> cum = half * (c.S * h);
      for (int j = 0; j < kN; ++j) A[o + j] = cum(j) + a_next;
      if (half * s > 1.0) {  // wider than the uniform layer panels
        // int_zeta^inf e^{-s(t - zeta)} h(t) dt = sum_k h^{(k)}(zeta) / s^{k+1}.
        const Eigen::Matrix<double, kN, 1> d1 = (c.D * h) / half, d2 = (D2 * h) / (half * half),
                                           d3 = (D3 * h) / (half * half * half);
        for (int j = 0; j < kN; ++j)
          E[o + j] = h(j) / s + d1(j) / (s * s) + d2(j) / (s * s * s) + d3(j) / (s * s * s * s);
      } else {
        for (int j = 0; j < kN; ++j) {
          for (int k = 0; k < kN; ++k) w(k) = std::exp(-s * (gr.zeta[o + k] - gr.zeta[o + j])) * h(k);
          E[o + j] = half * c.S.row(j).dot(w) + std::exp(-s * (gr.b[p] - gr.zeta[o + j])) * e_next;
        }
      }
      a_next = A[o];
      e_next = E[o];
    }
    double change = 0.0;
    for (std::size_t i = 0; i < F.size(); ++i) {
      const double fn = 1.0 + (A[i] - E[i]) / s;
      change = std::max(change, std::abs(fn - F[i]));
      F[i] = fn;
    }
    // On [0, eps] the kernel 1 - e^{-s t} is O(s eps): only E needs shifting.
    const double f0_new = 1.0 + (A[0] - std::exp(-s * gr.eps) * E[0]) / s;
    const double df = std::abs(f0_new - f0);
    f0 = f0_new;
    if (it > 0 && change < 1e-14 && df < 1e-14) return f0;
  }
  return f0;
}

PsiFit psi_fit(const std::vector<double>& mu, const std::vector<double>& F0, int n_int, double s_lo,
               double s_hi) {
  if (mu.size() != F0.size() || int(mu.size()) < n_int + 2)
    throw DomainError("psi_fit needs matching samples, more than the basis size");
  const int rows = int(mu.size());
  // Residuals are weighted by mu^{s_lo} so every sample carries the
  // non-integer term with comparable weight.
  auto solve = [&](double s, PsiFit* out) {
    // At an integer exponent inside the basis the extra term degenerates to mu^{-s} log mu.
    const bool log_term = std::abs(s - std::round(s)) < 1e-9 && std::round(s) >= 1 && std::round(s) <= n_int;
    Eigen::MatrixXd M(rows, n_int + 1);
    Eigen::VectorXd y(rows);
    for (int i = 0; i < rows; ++i) {
      const double wgt = std::pow(mu[i], s_lo);
      for (int k = 1; k <= n_int; ++k) M(i, k - 1) = std::pow(mu[i], -k) * wgt;
      M(i, n_int) = std::pow(mu[i], -s) * (log_term ? std::log(mu[i]) : 1.0) * wgt;
      y(i) = (F0[i] - 1.0) * wgt;
    }
    Eigen::VectorXd scale = M.colwise().norm().transpose();
    for (int k = 0; k <= n_int; ++k) M.col(k) /= scale(k);
    const Eigen::VectorXd x = M.colPivHouseholderQr().solve(y);
    const double res = (M * x - y).norm() / std::sqrt(double(rows));
    if (out) {
      out->int_coeffs.clear();
      for (int k = 0; k < n_int; ++k) out->int_coeffs.push_back(x(k) / scale(k));
      out->nonint_exponent = s;
      out->nonint_coeff = x(n_int) / scale(n_int);
      out->log_term = log_term;
      out->fit_residual = res;
    }
    return res;
  };
  PsiFit fit;
  if (!(s_hi > s_lo)) {
    solve(s_lo, &fit);
    return fit;
  }
  const int grid = 80;
  double best_s = s_lo, best = HUGE_VAL;
  for (int i = 0; i <= grid; ++i) {
    const double s = s_lo + (s_hi - s_lo) * i / grid;
    const double r = solve(s, nullptr);
    if (r < best) {
      best = r;
      best_s = s;
    }
  }
  const double step = (s_hi - s_lo) / grid;
  const auto r = boost::math::tools::brent_find_minima(
      [&](double s) { return solve(s, nullptr); }, std::max(s_lo, best_s - step),
      std::min(s_hi, best_s + step), 40);
  solve(r.first, &fit);
  return fit;
}

double watson_check(double mu, double m) {
  if (!(m > 1.0) || !(mu > 0.0)) throw DomainError("watson_check needs m > 1, mu > 0");
  const double b0 = std::min(0.5 / mu, 0.5);
  std::vector<double> br;
  push_geometric_down(br, b0);
  push_uniform(br, 800.0 / mu, 0.5 / mu);
  const Grid gr = make_grid(br, m);
  const Cheb& c = cheb();
  double sum = 0.25 * m * std::pow(gr.eps, m - 1.0);
  for (std::size_t p = 0; p < gr.panels(); ++p) {
    const double half = 0.5 * (gr.b[p] - gr.a[p]);
    for (int k = 0; k < kN; ++k) {
      const std::size_t i = p * kN + k;
      sum += half * c.S(0, k) * std::exp(-mu * gr.zeta[i]) * gr.g[i];
    }
  }
  const double lead = 0.25 * m * (m - 1.0) * std::tgamma(m - 1.0) * std::pow(mu, 1.0 - m);
  return sum / lead;
}

double indicator_theoretical(double theta, const SpectralParams& p) {
  return compute_Km(p.m) * std::cos(p.rho * theta);
}

double indicator_piecewise_numerator(double theta, const SpectralParams& p) {
  const double K = compute_Km(p.m);
  const double step = 2 * kPi / (p.m + 2.0);
  auto h = [&](int power) { return K * std::cos(p.rho * principal_arg(theta + power * step)); };
  if (p.level == 1) return std::max(h(2), h(-2));
  return std::max({h(1) + h(3), h(-1) + h(-3), h(3) + h(-3)});
}

double indicator_estimate(const std::function<LogValue(cplx)>& func, double theta,
                          const std::vector<double>& radii, double rho) {
  if (radii.size() < 3) throw DomainError("indicator_estimate needs at least 3 radii");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw DomainError("indicator_estimate needs increasing radii");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(radii.size());
  for (double r : radii) {
    const double x = std::pow(r, rho);
    const double y = func(std::polar(r, theta)).logmod;
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double asr_root(int n, const SpectralParams& p) {
  if (n < 1) throw DomainError("asr_root needs n >= 1");
  const AsymConstants k = asym_constants(p.m);
  const double an = k.a * n;
  return -(std::pow(an, 1.0 / k.rho) + (k.b / k.rho) * std::pow(an, 1.0 / k.rho - 1.0));
}

}  // namespace ptspec
