#pragma once

// Observables from critical trajectories: the change of variables
// (g, nu) <-> (m2, g0, nu0, z0), critical point, susceptibility, specific
// heat, pressure and the Gaussian scaling-limit pairing.

#include <gsl/gsl_errno.h>
#include <gsl/gsl_roots.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "fit.hpp"
#include "flow.hpp"
#include "lattice.hpp"

namespace phi4 {

inline std::string sci(double x)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

inline double bubble_constant(int n) { return (n + 8) / (16.0 * std::numbers::pi * std::numbers::pi); }

struct VariableMap {
  double g = 0.0;
  double eps = std::numeric_limits<double>::quiet_NaN();
  double m2 = 0.0;
  double g0 = 0.0, z0 = 0.0, nu0 = 0.0;
  double nu = 0.0;
  int iterations = 0;
  double residual = 0.0;  // |g0 - g (1 + z0)^2|
  Trajectory trajectory;
};

inline VariableMap solve_variable_map(const FlowTable& t, double g, double g0_guess = -1.0, double tol = 1e-15,
                                      int max_iter = 200, int plateau_steps = 20000)
{
  if (!(g >= 0.0) || !std::isfinite(g)) throw std::invalid_argument("solve_variable_map: g must be non-negative");
  VariableMap v;
  v.g = g;
  v.m2 = t.m2;
  double g0 = g0_guess > 0.0 ? g0_guess : g;
  for (int it = 1; it <= max_iter; ++it) {
    v.trajectory = critical_trajectory(t, g0, plateau_steps);
    const double z0 = v.trajectory.z0c;
    const double next = g * (1.0 + z0) * (1.0 + z0);
    v.iterations = it;
    if (std::abs(next - g0) <= tol * std::max(g0, 1e-300) || g == 0.0) {
      g0 = next;
      break;
    }
    g0 = next;
    if (it == max_iter) {
      v.residual = std::abs(next - g0);
      throw std::runtime_error("solve_variable_map: fixed point for g0 did not converge, residual " +
                               std::to_string(v.residual));
    }
  }
  v.trajectory = critical_trajectory(t, g0, plateau_steps);
  v.g0 = g0;
  v.z0 = v.trajectory.z0c;
  v.nu0 = v.trajectory.nu0c;
  v.residual = std::abs(g0 - g * (1.0 + v.z0) * (1.0 + v.z0));
  v.nu = (v.nu0 + t.m2) / (1.0 + v.z0);
  return v;
}

inline VariableMap solve_variable_map(const FlowModel& model, double g, double m2, double g0_guess = -1.0)
{
  return solve_variable_map(model.table(m2), g, g0_guess, 1e-15, 200, model.config().plateau_steps);
}

struct CriticalPoint {
  double g = 0.0;
  double nu_c = 0.0;               // from the m2 = 0 trajectory
  double nu_c_extrapolated = 0.0;  // quadratic in 1/log m^-2 through the last three grid points
  double error = 0.0;
  bool stable = true;
  double a = 0.0;                  // (n+2) (-Delta)^{-1}_{00}
  double ratio = 0.0;              // nu_c / (-g a)
  std::vector<double> m2_grid, nu_grid;
  VariableMap at_zero;
};

inline CriticalPoint critical_nu(const FlowModel& model, double g, const std::vector<double>& m2_grid = {1e-8, 1e-10,
                                                                                                        1e-12, 1e-14})
{
  if (!(g > 0.0)) throw std::invalid_argument("critical_nu: g must be positive");
  if (m2_grid.size() < 3) throw std::invalid_argument("critical_nu: need at least three masses");
  CriticalPoint c;
  c.g = g;
  c.at_zero = solve_variable_map(model, g, 0.0);
  c.nu_c = c.at_zero.nu;
  double guess = c.at_zero.g0;
  for (double m2 : m2_grid) {
    if (!(m2 > 0.0)) throw std::invalid_argument("critical_nu: grid masses must be positive");
    const VariableMap v = solve_variable_map(model, g, m2, guess);
    guess = v.g0;
    c.m2_grid.push_back(m2);
    c.nu_grid.push_back(v.nu);
  }
  auto extrapolate = [&](std::size_t end) {
    double x[3], y[3];
    for (int k = 0; k < 3; ++k) {
      x[k] = 1.0 / std::log(1.0 / c.m2_grid[end - 3 + k]);
      y[k] = c.nu_grid[end - 3 + k];
    }
    return quadratic_extrapolate(x, y);
  };
  const std::size_t K = c.m2_grid.size();
  c.nu_c_extrapolated = extrapolate(K);
  const double previous = K > 3 ? extrapolate(K - 1) : c.nu_c_extrapolated;
  c.error = std::abs(c.nu_c_extrapolated - c.nu_c) + std::abs(c.nu_c_extrapolated - previous);
  c.stable = c.error <= 1e-2 * std::abs(c.nu_c);
  c.a = (model.config().n + 2) * delta_inv_origin();
  c.ratio = c.nu_c / (-g * c.a);
  return c;
}

struct Susceptibility {
  double eps = 0.0;
  double chi = 0.0;
  double eps_direct = 0.0;  // nu(m2) - nu_c from the variable map
  VariableMap map;
  int evaluations = 0;
};

// Smallest m2 the flow table resolves with scales to spare.
inline double smallest_mass(const FlowModel& model)
{
  return std::pow(static_cast<double>(model.L()), -2.0 * (model.config().J_cap - 6));
}

// Root of nu(m2) = nu_c + eps in log m2. The second-order variable map
// leaves nu(m2) - nu_c with a floor of order g^2 / log m^-2, so small eps
// cannot be bracketed; EpsilonMap avoids this.
inline Susceptibility susceptibility_direct(const FlowModel& model, double g, double eps, double nu_c,
                                            double g0_guess = -1.0)
{
  if (!(eps > 0.0)) throw std::invalid_argument("susceptibility: eps must be positive");
  Susceptibility s;
  s.eps = eps;
  if (g == 0.0) {
    s.map = solve_variable_map(model, 0.0, eps);
    s.chi = 1.0 / eps;
    return s;
  }
  struct Ctx {
    const FlowModel* model;
    double g, target, guess;
    int evals;
    VariableMap last;
  } ctx{&model, g, nu_c + eps, g0_guess, 0, {}};
  auto f = [](double lm, void* p) {
    auto* c = static_cast<Ctx*>(p);
    c->last = solve_variable_map(*c->model, c->g, std::exp(lm), c->guess);
    c->guess = c->last.g0;
    ++c->evals;
    return c->last.nu - c->target;
  };
  gsl_function F{f, &ctx};
  const double lmin = std::log(smallest_mass(model));
  double lo = std::max(std::log(eps) - 1.0, lmin), hi = std::log(eps) + 1.0;
  double flo = f(lo, &ctx), fhi = f(hi, &ctx);
  while (flo > 0.0 && lo > lmin) {
    lo = std::max(lo - 2.0, lmin);
    flo = f(lo, &ctx);
  }
  if (flo > 0.0)
    throw std::domain_error("susceptibility: eps = " + sci(eps) +
                            " is below the bracketable range (nu(m2_min) - nu_c exceeds it)");
  for (int k = 0; fhi < 0.0 && k < 40; ++k) {
    hi += 2.0;
    fhi = f(hi, &ctx);
  }
  if (fhi < 0.0) throw std::domain_error("susceptibility: eps too large to bracket");
  gsl_set_error_handler_off();
  gsl_root_fsolver* solver = gsl_root_fsolver_alloc(gsl_root_fsolver_brent);
  gsl_root_fsolver_set(solver, &F, lo, hi);
  int status = GSL_CONTINUE;
  for (int it = 0; it < 200 && status == GSL_CONTINUE; ++it) {
    gsl_root_fsolver_iterate(solver);
    status = gsl_root_test_interval(gsl_root_fsolver_x_lower(solver), gsl_root_fsolver_x_upper(solver), 1e-13, 0.0);
  }
  const double root = gsl_root_fsolver_root(solver);
  gsl_root_fsolver_free(solver);
  if (status != GSL_SUCCESS) throw std::runtime_error("susceptibility: root solve did not converge");
  f(root, &ctx);
  s.map = ctx.last;
  s.map.eps = eps;
  s.chi = (1.0 + s.map.z0) / s.map.m2;
  s.eps_direct = s.map.nu - nu_c;
  s.evaluations = ctx.evals;
  return s;
}

// eps(m2) = int_0^{m2} dnu/dm2 with dnu/dm2 from d chi/d nu = (1+z0)^2 d chi-hat/d nu0
// and d chi-hat/d nu0 = -r_inf / m^4, r_inf = lim L^{-2j} mu-bar'_j.
class EpsilonMap {
 public:
  EpsilonMap(const FlowModel& model, double g, double m2_max = 0.5, double step = 0.25)
      : model_(&model), g_(g)
  {
    if (!(g >= 0.0)) throw std::invalid_argument("EpsilonMap: g must be non-negative");
    if (!(step > 0.0 && step <= 1.0)) throw std::invalid_argument("EpsilonMap: log step must lie in (0, 1]");
    nu_c_ = g == 0.0 ? 0.0 : solve_variable_map(model, g, 0.0).nu;
    const double t0 = std::log(smallest_mass(model)), t1 = std::log(m2_max);
    const int K = static_cast<int>(std::ceil((t1 - t0) / step));
    h_ = (t1 - t0) / K;
    double guess = -1.0;
    std::vector<double> z0(K + 1), r(K + 1);
    for (int k = 0; k <= K; ++k) {
      t_.push_back(t0 + k * h_);
      const VariableMap v = solve_variable_map(model, g, std::exp(t_.back()), guess);
      guess = v.g0;
      z0[k] = v.z0;
      const Trajectory& tr = v.trajectory;
      r[k] = tr.mu_p[tr.J] * std::pow(static_cast<double>(tr.L), -2.0 * tr.J);
      if (!(r[k] > 0.0)) throw std::domain_error("EpsilonMap: tangent flow lost positivity");
    }
    for (int k = 0; k <= K; ++k) {
      const int a = std::max(k - 1, 0), b = std::min(k + 1, K);
      const double dz = (z0[b] - z0[a]) / ((b - a) * h_);
      f_.push_back(((1.0 + z0[k]) - dz) / ((1.0 + z0[k]) * (1.0 + z0[k]) * r[k]));
    }
    cum_.push_back(f_[0] * std::exp(t_[0]));
    for (int k = 0; k < K; ++k) cum_.push_back(cum_[k] + cell(k, t_[k + 1]));
  }
  double g() const { return g_; }
  double nu_c() const { return nu_c_; }
  const FlowModel& model() const { return *model_; }
  double eps_min() const { return cum_.front(); }
  double eps_max() const { return cum_.back(); }

  double eps_of_m2(double m2) const
  {
    if (!(m2 > 0.0)) throw std::invalid_argument("eps_of_m2: m2 must be positive");
    const double t = std::log(m2);
    if (t <= t_.front()) return f_.front() * m2;
    if (t >= t_.back()) throw std::domain_error("eps_of_m2: m2 above the tabulated range");
    const int k = std::min(static_cast<int>((t - t_.front()) / h_), static_cast<int>(t_.size()) - 2);
    return cum_[k] + cell(k, t);
  }

  double m2_of_eps(double eps) const
  {
    if (!(eps > 0.0)) throw std::invalid_argument("m2_of_eps: eps must be positive");
    if (eps > eps_max()) throw std::domain_error("m2_of_eps: eps = " + sci(eps) + " above the tabulated range");
    if (eps <= eps_min()) return eps / f_.front();
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), eps);
    const int k = static_cast<int>(it - cum_.begin()) - 1;
    double lo = t_[k], hi = t_[k + 1];
    for (int i = 0; i < 200 && hi - lo > 1e-15 * std::abs(lo); ++i) {
      const double mid = 0.5 * (lo + hi);
      (cum_[k] + cell(k, mid) < eps ? lo : hi) = mid;
    }
    return std::exp(0.5 * (lo + hi));
  }

 private:
  // int_{t_k}^{t} e^s f(s) ds with f linear on the cell
  double cell(int k, double t) const
  {
    const double slope = (f_[k + 1] - f_[k]) / h_;
    const double ek = std::exp(t_[k]), et = std::exp(t);
    return f_[k] * (et - ek) + slope * (et * (t - t_[k] - 1.0) + ek);
  }

  const FlowModel* model_;
  double g_;
  double nu_c_ = 0.0;
  double h_ = 0.0;
  std::vector<double> t_, f_, cum_;
};

inline Susceptibility susceptibility(const EpsilonMap& map, double eps)
{
  if (!(eps > 0.0)) throw std::invalid_argument("susceptibility: eps must be positive");
  Susceptibility s;
  s.eps = eps;
  s.map = solve_variable_map(map.model(), map.g(), map.m2_of_eps(eps));
  s.map.eps = eps;
  s.chi = (1.0 + s.map.z0) / s.map.m2;
  s.eps_direct = s.map.nu - map.nu_c();
  return s;
}

struct SusceptibilityCurve {
  int n = 1;
  double g = 0.0;
  double nu_c = 0.0;
  double gamma = 0.0;
  std::vector<Susceptibility> points;
  LinearFit fit;          // log(chi eps) against log log(1/eps)
  double amplitude = 0.0; // mean of chi eps (log 1/eps)^{-gamma}
  double amplitude_reference = 0.0;  // (b g)^gamma
};

inline std::vector<double> log_grid(double hi, double lo, int per_decade)
{
  if (!(hi > lo && lo > 0.0) || per_decade < 1) throw std::invalid_argument("log_grid: need hi > lo > 0");
  std::vector<double> out;
  const int steps = static_cast<int>(std::lround(std::log10(hi / lo) * per_decade));
  for (int k = 0; k <= steps; ++k) out.push_back(hi * std::pow(10.0, -static_cast<double>(k) / per_decade));
  return out;
}

inline SusceptibilityCurve susceptibility_curve(const EpsilonMap& map, const std::vector<double>& eps_grid)
{
  SusceptibilityCurve c;
  c.n = map.model().config().n;
  c.g = map.g();
  const double g = c.g;
  c.gamma = gamma_exponent<double>(c.n);
  c.nu_c = map.nu_c();
  std::vector<double> x, y;
  for (double e : eps_grid) {
    c.points.push_back(susceptibility(map, e));
    x.push_back(std::log(std::log(1.0 / e)));
    y.push_back(std::log(c.points.back().chi * e));
    c.amplitude += c.points.back().chi * e * std::pow(std::log(1.0 / e), -c.gamma) / eps_grid.size();
  }
  if (x.size() >= 2) c.fit = linear_fit(x, y);
  c.amplitude_reference = std::pow(bubble_constant(c.n) * g, c.gamma);
  return c;
}

struct DerivativeCheck {
  std::vector<double> eps, chi, dchi_dnu, reference, deviation;
  bool all_negative = true;
  bool coarse = false;
};

// Centred differences of chi in nu on a sorted eps grid against -(g b)^{-gamma} chi^2 (log chi)^{-gamma}.
inline DerivativeCheck susceptibility_derivative_check(const SusceptibilityCurve& c)
{
  DerivativeCheck d;
  const auto& p = c.points;
  for (std::size_t i = 1; i + 1 < p.size(); ++i) {
    const double dchi = (p[i + 1].chi - p[i - 1].chi) / (p[i + 1].eps - p[i - 1].eps);
    const double chi = p[i].chi;
    const double ref = c.g == 0.0 ? -chi * chi
                                  : -std::pow(c.g * bubble_constant(c.n), -c.gamma) * chi * chi *
                                        std::pow(std::log(chi), -c.gamma);
    d.eps.push_back(p[i].eps);
    d.chi.push_back(chi);
    d.dchi_dnu.push_back(dchi);
    d.reference.push_back(ref);
    d.deviation.push_back(dchi / ref);
    d.all_negative = d.all_negative && dchi < 0.0;
    const double spread = std::max(p[i + 1].eps / p[i - 1].eps, p[i - 1].eps / p[i + 1].eps);
    d.coarse = d.coarse || spread > 4.0;
  }
  return d;
}

struct SpecificHeat {
  double eps = 0.0;
  double c_H = 0.0;           // -(1+z0)^2 u''
  double closed_form = 0.0;   // (1+z0)^2 c^2 g0^{-2 gamma} n/(2(n+8)) sum beta_j g_j^{2 gamma}
  double loglog = 0.0;        // log log 1/eps
  VariableMap map;
};

inline double closed_form_specific_heat(const FlowTable& t, const VariableMap& v)
{
  const Trajectory& tr = v.trajectory;
  const double gam = gamma_exponent<double>(t.n);
  double sum = 0.0;
  for (int j = 0; j <= tr.J; ++j) sum += t.c[j].beta * std::pow(tr.g[j], 2.0 * gam);
  if (tr.plateau) sum += 2.0 * gam > 1.0 ? std::pow(tr.g[tr.J], 2.0 * gam - 1.0) / (2.0 * gam - 1.0)
                                         : std::numeric_limits<double>::infinity();
  const double c = tr.tangent_constant;
  return (1.0 + v.z0) * (1.0 + v.z0) * c * c * std::pow(v.g0, -2.0 * gam) * t.n / (2.0 * (t.n + 8.0)) * sum;
}

inline SpecificHeat specific_heat_at(const FlowModel& model, const VariableMap& v, double eps)
{
  SpecificHeat h;
  h.eps = eps;
  h.map = v;
  const double s = (1.0 + v.z0) * (1.0 + v.z0);
  h.c_H = -s * v.trajectory.u_inf_pp;
  h.closed_form = v.g == 0.0 ? h.c_H : closed_form_specific_heat(model.table(v.m2), v);
  h.loglog = eps > 0.0 && eps < 1.0 ? std::log(std::log(1.0 / eps)) : std::numeric_limits<double>::infinity();
  return h;
}

inline SpecificHeat specific_heat(const EpsilonMap& map, double eps)
{
  if (eps == 0.0) return specific_heat_at(map.model(), solve_variable_map(map.model(), map.g(), 0.0), 0.0);
  return specific_heat_at(map.model(), susceptibility(map, eps).map, eps);
}

// Large-n asymptote of c_H: n/(2(n-4)) g^{-1} for n > 4, (1/6) g^{-1} log log for n = 4.
inline double specific_heat_reference(int n, double g)
{
  if (n > 4) return n / (2.0 * (n - 4.0)) / g;
  if (n == 4) return 1.0 / (6.0 * g);
  return std::numeric_limits<double>::quiet_NaN();
}

struct Pressure {
  double eps = 0.0;
  double p = 0.0;
  double free = 0.0;         // p(0, m2)
  double q = 0.0;            // (n/2) log(1+z0) - u_inf
  double dp_dnu = 0.0;       // -(1+z0) u'
  double reference = 0.0;    // (n/2) C_{1/chi}(0)
  VariableMap map;
};

inline Pressure pressure_at(const FlowModel& model, const VariableMap& v, double eps, double chi)
{
  const int n = model.config().n;
  Pressure p;
  p.eps = eps;
  p.map = v;
  p.free = free_pressure_infinite(n, v.m2);
  p.q = 0.5 * n * std::log1p(v.z0) - v.trajectory.u_inf;
  p.p = p.free + p.q;
  p.dp_dnu = -(1.0 + v.z0) * v.trajectory.u_inf_p;
  p.reference = 0.5 * n * green_infinite(std::isfinite(chi) && chi > 0.0 ? 1.0 / chi : 0.0, {0, 0, 0, 0});
  return p;
}

inline Pressure pressure(const EpsilonMap& map, double eps)
{
  if (eps == 0.0) {
    const VariableMap v = solve_variable_map(map.model(), map.g(), 0.0);
    return pressure_at(map.model(), v, 0.0, std::numeric_limits<double>::infinity());
  }
  const Susceptibility s = susceptibility(map, eps);
  return pressure_at(map.model(), s.map, eps, s.chi);
}

// Test function on the unit torus as a finite Fourier series h(x) = sum_l c_l e^{2 pi i l.x}.
struct FourierMode {
  std::array<int, kDim> l{};
  std::complex<double> c{1.0, 0.0};
};

struct PairingResult {
  int N = 0;
  double eps = 0.0;
  double m2 = 0.0;              // lattice mass m-tilde^2
  double scaled_mass = 0.0;     // m_N^2 = L^{2N} m-tilde^2
  double value = 0.0;
  double white_noise = 0.0;     // sum |c_l|^2
  double gff = 0.0;             // sum |c_l|^2 / (4 pi^2 |l|^2 / m^2 + 1) at m^2 = scaled_mass
  std::string regime;
};

// m_N^2 sum_l |c_l|^2 / (lambda_N(l) + m_N^2) with lambda_N the rescaled lattice symbol on the torus of side L^N.
inline double gaussian_pairing(const std::vector<FourierMode>& h, int N, int L, double scaled_mass)
{
  if (h.empty()) throw std::invalid_argument("gaussian_pairing: empty test function");
  const double side = std::pow(static_cast<double>(L), N);
  double total = 0.0;
  for (const auto& m : h) {
    double lam = 0.0;
    for (int d = 0; d < kDim; ++d) {
      if (std::abs(m.l[d]) * 2.0 > side) throw std::invalid_argument("gaussian_pairing: mode above the Nyquist limit");
      const double s = std::sin(std::numbers::pi * m.l[d] / side);
      lam += 4.0 * s * s;
    }
    lam *= side * side;
    total += std::norm(m.c) * scaled_mass / (lam + scaled_mass);
  }
  return total;
}

inline double continuum_gff_pairing(const std::vector<FourierMode>& h, double mass2)
{
  double total = 0.0;
  for (const auto& m : h) {
    double l2 = 0.0;
    for (int d = 0; d < kDim; ++d) l2 += static_cast<double>(m.l[d]) * m.l[d];
    total += std::norm(m.c) / (4.0 * std::numbers::pi * std::numbers::pi * l2 / mass2 + 1.0);
  }
  return total;
}

inline PairingResult scaling_limit_pairing(const EpsilonMap& map, const std::vector<FourierMode>& h, int N, double eps)
{
  const int L = map.model().L();
  PairingResult r;
  r.N = N;
  r.eps = eps;
  const Susceptibility s = susceptibility(map, eps);
  r.m2 = s.map.m2;
  const double side2 = std::pow(static_cast<double>(L), 2.0 * N);
  r.scaled_mass = side2 * r.m2;
  r.value = gaussian_pairing(h, N, L, r.scaled_mass);
  for (const auto& m : h) r.white_noise += std::norm(m.c);
  r.gff = continuum_gff_pairing(h, r.scaled_mass);
  // chi^(N) L^{-2N} ~ 1/m_N^2: small means white noise
  r.regime = r.scaled_mass > 1e3 ? "white-noise" : "massive-free-field";
  return r;
}

// eps_N = alpha m^2 L^{-2N} (log L^N)^gamma.
inline double gff_schedule(double alpha, double mass2, int L, int N, double gamma)
{
  return alpha * mass2 * std::pow(static_cast<double>(L), -2.0 * N) *
         std::pow(N * std::log(static_cast<double>(L)), gamma);
}

struct MassAsymptote {
  std::vector<double> eps, ratio;  // m-tilde^2 / (eps (log 1/eps)^{-gamma})
  double c_g = 0.0;                // mean ratio
  double drift = 0.0;              // (max - min) / c_g
  double z0_limit = 0.0;           // z-tilde_0(g, 0)
  double amplitude = 0.0;          // A(g) from the chi curve
  double consistency = 0.0;        // c_g A / (1 + z0_limit)
};

inline MassAsymptote mass_epsilon_asymptote(const FlowModel& model, const SusceptibilityCurve& c)
{
  MassAsymptote a;
  if (c.points.empty()) throw std::invalid_argument("mass_epsilon_asymptote: empty curve");
  for (const auto& p : c.points) {
    a.eps.push_back(p.eps);
    const double r = c.g == 0.0 ? p.map.m2 / p.eps : p.map.m2 / (p.eps * std::pow(std::log(1.0 / p.eps), -c.gamma));
    a.ratio.push_back(r);
    a.c_g += r / c.points.size();
  }
  double lo = a.ratio[0], hi = a.ratio[0];
  for (double r : a.ratio) {
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  a.drift = (hi - lo) / a.c_g;
  a.z0_limit = c.g == 0.0 ? 0.0 : solve_variable_map(model, c.g, 0.0).z0;
  a.amplitude = c.g == 0.0 ? 1.0 : c.amplitude;
  a.consistency = a.c_g * a.amplitude / (1.0 + a.z0_limit);
  return a;
}

}  // namespace phi4
