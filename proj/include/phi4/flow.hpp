#pragma once

// Second-order renormalisation-group flow: the perturbative map, the
// triangularising change of variables, critical trajectories and their
// nu_0-derivatives.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "coefficients.hpp"

namespace phi4 {

template <class S>
struct CouplingVectorT {
  S g{}, nu{}, z{}, y{}, u{};
};
using CouplingVector = CouplingVectorT<double>;

// U_pt(V); the u slot of the result holds delta u_pt.
template <class S>
CouplingVectorT<S> u_pt(const CouplingVectorT<S>& V, const CoefficientSetT<S>& c)
{
  const PtInputsT<S>& p = c.in;
  const S &g = V.g, &nu = V.nu, &z = V.z, &y = V.y;
  const S two(2), four(4), half = S(1) / S(2), N(c.n);
  const S nup = nu + c.eta_p * g;
  const S d_nuw1 = nup * p.w1p - nu * p.w1;
  const S d_nu2w1 = nup * nup * p.w1p - nu * nu * p.w1;
  const S d_nuw2ss = nup * p.w2ssp - nu * p.w2ss;
  const S d_nu2wss = nup * nup * p.wssp - nu * nu * p.wss;
  CouplingVectorT<S> r;
  r.g = g - c.beta * g * g - four * g * d_nuw1;
  const S zy = z + y;
  const S& sg = c.pt_sign;
  r.nu = nu + c.eta_p * (g + four * g * nu * p.w1) - c.xi_p * g * g - c.gamma * c.beta * g * nu +
         sg * c.pi_p * g * zy - d_nu2w1;
  r.y = y + c.sigma * g * z - c.zeta * g * y - half * (two + N) * g * d_nuw2ss;
  if (!c.printed_pt) r.y -= y * d_nuw1;
  r.z = z + sg * (c.theta * g * g + half * d_nu2wss) - two * (c.printed_pt ? z : zy) * d_nuw1 - (r.y - y);
  r.u = c.kappa_g * g + c.kappa_nu_p * nu - c.kappa_z * zy - c.kappa_gg * g * g - c.kappa_nunu_p * nu * nu -
        c.kappa_zz * zy * zy + c.kappa_znu_p * zy * nu + c.kappa_gnu_p * g * nu + c.kappa_gz * g * zy;
  return r;
}

template <class S>
struct BarCouplingsT {
  S g{}, z{}, mu{};
};
using BarCouplings = BarCouplingsT<double>;

// T_j(g, z, mu) with the w-bar of scale j; sign is the pt_sign of the
// coefficient set.
template <class S>
BarCouplingsT<S> transform(const BarCouplingsT<S>& v, const S& w1bar, const S& wssbar, const S& sign = S(1))
{
  BarCouplingsT<S> t;
  t.g = v.g + S(4) * v.g * v.mu * w1bar;
  t.z = v.z + S(2) * v.z * v.mu * w1bar - sign * v.mu * v.mu * wssbar / S(2);
  t.mu = v.mu + v.mu * v.mu * w1bar;
  return t;
}

inline constexpr double kInversionRadius = 0.1;  // bound on |mu w1bar| for inversion

inline BarCouplings inverse_transform(const BarCouplings& t, double w1bar, double wssbar, double sign = 1.0,
                                      double tol = 1e-15, int max_iter = 200)
{
  if (std::abs(t.mu * w1bar) > kInversionRadius)
    throw std::domain_error("inverse_transform: |mu w1bar| = " + std::to_string(std::abs(t.mu * w1bar)) +
                            " outside the inversion ball");
  BarCouplings v = t;
  for (int it = 0; it < max_iter; ++it) {
    BarCouplings nx;
    nx.mu = t.mu - v.mu * v.mu * w1bar;
    nx.g = t.g / (1.0 + 4.0 * nx.mu * w1bar);
    nx.z = (t.z + sign * 0.5 * nx.mu * nx.mu * wssbar) / (1.0 + 2.0 * nx.mu * w1bar);
    const double d = std::max({std::abs(nx.g - v.g), std::abs(nx.z - v.z), std::abs(nx.mu - v.mu)});
    v = nx;
    const double scale = std::max({std::abs(v.g), std::abs(v.z), std::abs(v.mu), 1e-300});
    if (d <= tol * scale) return v;
  }
  throw std::runtime_error("inverse_transform: fixed point did not converge");
}

struct BarStep {
  BarCouplings next;
  double du = 0.0;
};

// One step of the triangular flow and the constant term delta u-bar.
template <class S>
BarCouplingsT<S> bar_map(const BarCouplingsT<S>& b, const CoefficientSetT<S>& c, const RescaledCoefficientsT<S>& r,
                         const S& L)
{
  BarCouplingsT<S> nx;
  nx.g = b.g - c.beta * b.g * b.g;
  nx.z = b.z + c.pt_sign * c.theta * b.g * b.g;
  nx.mu = L * L * b.mu * (S(1) - c.gamma * c.beta * b.g) + r.eta * b.g - r.xi * b.g * b.g +
          c.pt_sign * r.pi * b.g * b.z;
  return nx;
}

template <class S>
S bar_du(const BarCouplingsT<S>& b, const CoefficientSetT<S>& c, const RescaledCoefficientsT<S>& r)
{
  return c.kappa_g * b.g + r.kappa_nubar * b.mu - c.kappa_z * b.z - c.kappa_gg * b.g * b.g -
         r.kappa_mumu * b.mu * b.mu - c.kappa_zz * b.z * b.z + r.kappa_gmu * b.g * b.mu + r.kappa_zmu * b.z * b.mu +
         c.kappa_gz * b.g * b.z;
}

inline BarStep bar_step(const BarCouplings& b, const CoefficientSet& c, const RescaledCoefficients& r)
{
  return {bar_map(b, c, r, static_cast<double>(c.L)), bar_du(b, c, r)};
}

// Coefficients of one mass for the flow, with their rescaled forms.
struct FlowTable {
  int n = 1;
  int L = 2;
  double m2 = 0.0;
  std::vector<CoefficientSet> c;
  std::vector<RescaledCoefficients> r;
  int size() const { return static_cast<int>(c.size()); }
};

inline FlowTable make_table(std::vector<CoefficientSet> c, const FormulaOptions& opt = {})
{
  if (c.empty()) throw std::invalid_argument("make_table: empty coefficient list");
  FlowTable t;
  t.n = c.front().n;
  t.L = c.front().L;
  t.m2 = c.front().m2;
  for (const auto& x : c) t.r.push_back(rescaled(x, opt));
  t.c = std::move(c);
  return t;
}

struct FlowConfig {
  int n = 1;
  int J_cap = 60;
  double omega = 2.0;
  FormulaOptions formulas;
  EngineOptions engine;
  int plateau_steps = 20000;  // extra constant-coefficient steps for m2 = 0 tails
};

class FlowModel {
 public:
  explicit FlowModel(FlowConfig cfg) : cfg_(cfg), engine_(shared_engine(cfg.engine))
  {
    check_components(cfg_.n);
    if (cfg_.J_cap < 2 || cfg_.J_cap > engine_->max_scale())
      throw std::invalid_argument("FlowModel: J_cap must lie in [2, " + std::to_string(engine_->max_scale()) + "]");
  }
  const FlowConfig& config() const { return cfg_; }
  int L() const { return engine_->options().L; }
  const HeatKernelEngine& engine() const { return *engine_; }
  FlowTable table(double m2) const
  {
    return make_table(coefficient_table(*engine_, m2, cfg_.n, cfg_.J_cap, cfg_.formulas), cfg_.formulas);
  }

 private:
  FlowConfig cfg_;
  std::shared_ptr<const HeatKernelEngine> engine_;
};

struct Trajectory {
  int n = 1;
  int L = 2;
  int J = 0;
  double g0 = 0.0;
  double m2 = 0.0;
  std::vector<double> g, z, mu;   // barred couplings at j = 0..J
  std::vector<double> du, u;      // delta u-bar_{j+1} and u_{j+1} = sum_{i<=j} du_i
  std::vector<double> mu_p;       // d mu-bar_j / d nu_0
  std::vector<double> du_p, du_pp;
  std::vector<double> chi;        // chi_j
  std::vector<double> envelope;   // chi_j g_j (1 + g0 j) / g0
  double nu0c = 0.0, z0c = 0.0;
  double u_inf = 0.0, u_inf_p = 0.0, u_inf_pp = 0.0;
  double z_tail = 0.0;            // contribution to z-bar_J from scales beyond J
  double upp_tail = 0.0;          // contribution to u'' from scales beyond J
  double tangent_constant = 1.0;  // lim mu-bar'_j L^{-2j} (g0 / g_j)^gamma
  bool plateau = false;           // m2 = 0 tails attached
};

inline void check_step(const CoefficientSet& c, double g, int j)
{
  if (!(1.0 - c.gamma * c.beta * g > 0.0))
    throw std::domain_error("critical_trajectory: 1 - gamma beta g <= 0 at scale " + std::to_string(j));
}

// Critical trajectory with g-bar_0 = g0 and z-bar, mu-bar vanishing at infinity.
inline Trajectory critical_trajectory(const FlowTable& t, double g0, int plateau_steps = 20000)
{
  if (g0 < 0.0) throw std::invalid_argument("critical_trajectory: g0 must be non-negative");
  const int J = t.size() - 1;
  const double L2 = static_cast<double>(t.L) * t.L;
  Trajectory tr;
  tr.n = t.n;
  tr.L = t.L;
  tr.J = J;
  tr.g0 = g0;
  tr.m2 = t.m2;
  tr.plateau = t.m2 == 0.0;
  tr.g.assign(J + 1, 0.0);
  tr.z.assign(J + 1, 0.0);
  tr.mu.assign(J + 1, 0.0);
  tr.g[0] = g0;
  for (int j = 0; j < J; ++j) tr.g[j + 1] = tr.g[j] - t.c[j].beta * tr.g[j] * tr.g[j];

  // Boundary data at J: zero for m2 > 0 (coefficients have decayed); for
  // m2 = 0 the plateau recursion is summed.
  double zJ = 0.0, muJ = 0.0;
  const CoefficientSet& cJ = t.c[J];
  const RescaledCoefficients& rJ = t.r[J];
  if (tr.plateau && g0 > 0.0) {
    zJ = -cJ.pt_sign * cJ.theta / cJ.beta * tr.g[J];
    const double a = -rJ.eta / (L2 - 1.0);
    const double b = (a * cJ.beta * (1.0 - L2 * cJ.gamma) - rJ.xi - rJ.pi * cJ.theta / cJ.beta) / (1.0 - L2);
    muJ = a * tr.g[J] + b * tr.g[J] * tr.g[J];
  }
  tr.z_tail = zJ;
  tr.z[J] = zJ;
  tr.mu[J] = muJ;
  for (int j = J - 1; j >= 0; --j) {
    const CoefficientSet& c = t.c[j];
    const RescaledCoefficients& r = t.r[j];
    check_step(c, tr.g[j], j);
    const double gj = tr.g[j];
    tr.z[j] = tr.z[j + 1] - c.pt_sign * c.theta * gj * gj;
    tr.mu[j] = (tr.mu[j + 1] - r.eta * gj + r.xi * gj * gj - c.pt_sign * r.pi * gj * tr.z[j]) /
               (L2 * (1.0 - c.gamma * c.beta * gj));
  }
  tr.nu0c = tr.mu[0];
  tr.z0c = tr.z[0];

  const MassScale jm = mass_scale(t.m2, t.L);
  tr.du.assign(J + 1, 0.0);
  tr.u.assign(J + 1, 0.0);
  tr.mu_p.assign(J + 1, 0.0);
  tr.du_p.assign(J + 1, 0.0);
  tr.du_pp.assign(J + 1, 0.0);
  tr.chi.assign(J + 1, 1.0);
  tr.envelope.assign(J + 1, 0.0);
  tr.mu_p[0] = 1.0;
  double acc = 0.0;
  for (int j = 0; j <= J; ++j) {
    const CoefficientSet& c = t.c[j];
    const RescaledCoefficients& r = t.r[j];
    if (j > 0) tr.mu_p[j] = tr.mu_p[j - 1] * L2 * (1.0 - t.c[j - 1].gamma * t.c[j - 1].beta * tr.g[j - 1]);
    const BarCouplings b{tr.g[j], tr.z[j], tr.mu[j]};
    tr.du[j] = bar_du(b, c, r);
    acc += tr.du[j];
    tr.u[j] = acc;
    tr.du_p[j] = (r.kappa_nubar - 2.0 * r.kappa_mumu * b.mu + r.kappa_gmu * b.g + r.kappa_zmu * b.z) * tr.mu_p[j];
    tr.du_pp[j] = -2.0 * r.kappa_mumu * tr.mu_p[j] * tr.mu_p[j];
    tr.chi[j] = chi(j, jm);
    tr.envelope[j] = g0 > 0.0 ? tr.chi[j] * tr.g[j] * (1.0 + g0 * j) / g0 : 0.0;
  }
  tr.u_inf = acc;
  for (int j = 0; j <= J; ++j) {
    tr.u_inf_p += tr.du_p[j];
    tr.u_inf_pp += tr.du_pp[j];
  }
  const double rJmu = tr.mu_p[J] * std::pow(L2, -J);
  tr.tangent_constant = g0 > 0.0 ? rJmu * std::pow(g0 / tr.g[J], cJ.gamma) : 1.0;

  if (tr.plateau) {
    // Continue the plateau flow, then close with the integral of beta r^2 over g.
    const double beta = cJ.beta, gam = cJ.gamma;
    double g = tr.g[J] - beta * tr.g[J] * tr.g[J];
    double rr = rJmu * (1.0 - gam * beta * tr.g[J]);
    const double pref = t.n / (2.0 * (t.n + 8.0));
    double tail = 0.0;
    if (g0 > 0.0) {
      for (int k = 0; k < plateau_steps; ++k) {
        tail += pref * beta * rr * rr;
        rr *= 1.0 - gam * beta * g;
        g -= beta * g * g;
      }
      if (2.0 * gam > 1.0)
        tail += pref * rr * rr / (g * (2.0 * gam - 1.0));
      else
        tail = std::numeric_limits<double>::infinity();
    } else {
      tail = std::numeric_limits<double>::infinity();
    }
    tr.upp_tail = t.n == 0 ? 0.0 : -tail;
    tr.u_inf_pp += tr.upp_tail;
  }
  return tr;
}

// Forward re-iteration of the barred recursions from the backward solution;
// returns the largest residual relative to the trajectory scale.
inline double forward_residual(const FlowTable& t, const Trajectory& tr)
{
  double worst = 0.0;
  const double L = t.L;
  for (int j = 0; j < tr.J; ++j) {
    const BarCouplings nx = bar_map(BarCouplings{tr.g[j], tr.z[j], tr.mu[j]}, t.c[j], t.r[j], L);
    const double s = std::max({std::abs(tr.g[j]), std::abs(tr.z[j]), std::abs(tr.mu[j]), 1e-300});
    worst = std::max({worst, std::abs(nx.g - tr.g[j + 1]) / s, std::abs(nx.z - tr.z[j + 1]) / s,
                      std::abs(nx.mu - tr.mu[j + 1]) / s});
  }
  return worst;
}

// mu-bar_j from a forward run with mu-bar_0 = mu0 and the trajectory's g, z.
inline std::vector<double> forward_mu(const FlowTable& t, const Trajectory& tr, double mu0)
{
  std::vector<double> mu(tr.J + 1);
  mu[0] = mu0;
  for (int j = 0; j < tr.J; ++j)
    mu[j + 1] = bar_map(BarCouplings{tr.g[j], tr.z[j], mu[j]}, t.c[j], t.r[j], static_cast<double>(t.L)).mu;
  return mu;
}

// Distance from the one-step identity 1/g_+ = 1/g + beta/(1 - beta g).
inline double inverse_g_identity_residual(const FlowTable& t, const Trajectory& tr)
{
  double worst = 0.0;
  for (int j = 0; j < tr.J; ++j) {
    const double b = t.c[j].beta, g = tr.g[j];
    const double lhs = 1.0 / tr.g[j + 1], rhs = 1.0 / g + b / (1.0 - b * g);
    worst = std::max(worst, std::abs(lhs - rhs) / std::abs(lhs));
  }
  return worst;
}

struct SelfConsistency {
  double scale = 0.0;       // |V|
  double bar_defect = 0.0;  // |phi-bar(T V) - T_+(V_pt^(0)(V))| / |V|^3
  double du_defect = 0.0;   // |phi-bar^du(T V) - delta u_pt(V)| / |V|^3
};

// Third-order agreement of the barred flow with the perturbative map at one scale.
inline SelfConsistency self_consistency(const CoefficientSet& c, const RescaledCoefficients& r, const BarCouplings& v)
{
  const double L = c.L;
  const double L2j = std::pow(L, 2.0 * c.j), L2j1 = L2j * L * L;
  const BarCouplings tv = transform(v, r.w1bar, r.wssbar, c.pt_sign);
  const BarCouplings lhs = bar_map(tv, c, r, L);
  const double du_lhs = bar_du(tv, c, r);
  const CouplingVector up = u_pt(CouplingVector{v.g, v.mu / L2j, v.z, 0.0, 0.0}, c);
  const BarCouplings vpt{up.g, up.z + up.y, up.nu * L2j1};
  const double w1n = c.in.w1p / L2j1, wssn = c.in.wssp / (L2j1 * L2j1);
  const BarCouplings rhs = transform(vpt, w1n, wssn, c.pt_sign);
  const double norm = std::max({std::abs(v.g), std::abs(v.z), std::abs(v.mu)});
  SelfConsistency s;
  s.scale = norm;
  const double n3 = norm * norm * norm;
  s.bar_defect = std::max({std::abs(lhs.g - rhs.g), std::abs(lhs.z - rhs.z), std::abs(lhs.mu - rhs.mu)}) / n3;
  s.du_defect = std::abs(du_lhs - up.u) / n3;
  return s;
}

}  // namespace phi4
