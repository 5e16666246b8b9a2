#pragma once

// Per-scale coefficients of the second-order flow and their rescaled forms.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "decomposition.hpp"
#include "heat_moments.hpp"
#include "moments.hpp"

namespace phi4 {

template <class S>
S ipow(S base, int e)
{
  S r(1);
  const bool inv = e < 0;
  for (int k = 0; k < (inv ? -e : e); ++k) r *= base;
  return inv ? S(1) / r : r;
}

template <class S>
S gamma_exponent(int n)
{
  return S(n + 2) / S(n + 8);
}

// Alternative sign and term conventions. The defaults are the ones the
// brute-force oracle reproduces; each flag restores the printed variant.
struct FormulaOptions {
  bool printed_quartic_sign = false;  // +2 Delta C (w^3)^(**) in kappa_gg
  bool printed_mixed_signs = false;   // kappa_gmu = n(n+2) w1bar C^2, kappa_zmu = kappa'_znu - n w1bar Delta C
  // -theta g^2, -pi' g z, -(1/2) delta[nu^2 w**] and the +mu^2 w1bar**/2 of T;
  // no -y delta[nu w1], kappa'_gnu or kappa_gz; +Delta C w** in kappa'_nunu
  bool printed_pt = false;
};

template <class S>
struct CoefficientSetT {
  int j = 0;
  int n = 1;
  int L = 2;
  double m2 = 0.0;
  S beta{}, theta{}, xi_p{}, pi_p{}, sigma{}, zeta{}, eta_p{};
  S kappa_g{}, kappa_nu_p{}, kappa_z{}, kappa_znu_p{}, kappa_gg{}, kappa_nunu_p{}, kappa_zz{};
  S kappa_gnu_p{}, kappa_gz{};
  S gamma{};
  S pt_sign{1};  // -1 for the printed signs of theta, pi' and the mu^2 term of T
  bool printed_pt = false;
  PtInputsT<S> in;
};
using CoefficientSet = CoefficientSetT<double>;

template <class S>
struct RescaledCoefficientsT {
  int j = 0;
  S eta{}, xi{}, pi{};
  S w1bar{}, wssbar{};
  S kappa_nubar{};  // kappa'_nu L^{-2j}: coefficient of mu-bar in delta u-bar
  S kappa_mumu{}, kappa_gmu{}, kappa_zmu{};
};
using RescaledCoefficients = RescaledCoefficientsT<double>;

// delta[f(nu, w)] = f(nu+, w+) - f(nu, w) with nu+ = nu + eta' g.
template <class S, class W, class F>
S delta_increment(F&& f, const S& nu, const S& g, const S& eta_p, const W& w, const W& wp)
{
  return f(nu + eta_p * g, wp) - f(nu, w);
}

template <class S>
CoefficientSetT<S> coefficient_set(const PtInputsT<S>& p, int n, int L, int j, double m2 = 0.0,
                                   const FormulaOptions& opt = {})
{
  check_components(n);
  CoefficientSetT<S> c;
  c.j = j;
  c.n = n;
  c.L = L;
  c.m2 = m2;
  c.in = p;
  const S N(n), two(2), four(4);
  c.gamma = gamma_exponent<S>(n);
  c.beta = (S(8) + N) * p.d_w2;
  c.theta = (two + N) * p.d_w3ss;
  c.eta_p = (N + two) * p.C00;
  c.xi_p = two * (two + N) * p.X3 + c.gamma * c.beta * c.eta_p;
  c.pi_p = (two + N) * p.d_wDw1;
  c.sigma = (two + N) * p.d_wDwss / two;
  c.zeta = (two + N) * p.d_grad / two;
  c.kappa_g = N * (N + two) * p.C00 * p.C00 / four;
  c.kappa_nu_p = N * p.C00 / two;
  c.kappa_z = N * p.DC00 / two;
  c.printed_pt = opt.printed_pt;
  c.pt_sign = opt.printed_pt ? S(-1) : S(1);
  const S dc_w1 = opt.printed_pt ? S(0) : two * p.DC00 * p.w1;
  c.kappa_znu_p = N * (p.d_wDw1 - dc_w1) / two;
  if (!opt.printed_pt) {
    c.kappa_gnu_p = N * (N + two) * p.C00 * (p.C00 * p.w1 - p.d_w2 / two);
    c.kappa_gz = N * p.C00 * c.pi_p / two;
  }
  S quartic = p.E;
  if (opt.printed_quartic_sign) quartic += four * p.DC00 * p.w3ss;
  c.kappa_gg = N * (N + two) * (quartic + (N + two) * p.C00 * p.C00 * p.d_w2) / four;
  c.kappa_nunu_p = N * (p.d_w2 - two * p.C00 * p.w1 - c.pt_sign * p.DC00 * p.wss) / four;
  c.kappa_zz = N * p.d_Dw2 / four;
  return c;
}

template <class S>
RescaledCoefficientsT<S> rescaled(const CoefficientSetT<S>& c, const FormulaOptions& opt = {})
{
  RescaledCoefficientsT<S> r;
  r.j = c.j;
  const S L(c.L);
  const S up = ipow(L, 2 * (c.j + 1)), down2 = ipow(L, -2 * c.j), down4 = ipow(L, -4 * c.j);
  r.eta = up * c.eta_p;
  r.xi = up * c.xi_p;
  r.pi = up * c.pi_p;
  r.w1bar = down2 * c.in.w1;
  r.wssbar = down4 * c.in.wss;
  r.kappa_nubar = down2 * c.kappa_nu_p;
  const S N(c.n);
  r.kappa_mumu = N * down4 * c.in.d_w2 / S(4);
  // mixed terms of delta u_pt o T^{-1}
  r.kappa_gmu = down2 * c.kappa_gnu_p - S(4) * c.kappa_g * r.w1bar;
  r.kappa_zmu = down2 * c.kappa_znu_p + S(2) * c.kappa_z * r.w1bar;
  if (opt.printed_mixed_signs) {
    r.kappa_gmu = S(4) * c.kappa_g * r.w1bar;
    r.kappa_zmu = down2 * N * c.in.d_wDw1 / S(2) - S(2) * c.kappa_z * r.w1bar;
  }
  return r;
}

// Coefficients at scales 0..J for one mass from the heat-kernel engine.
inline std::vector<CoefficientSet> coefficient_table(const HeatKernelEngine& e, double m2, int n, int J,
                                                     const FormulaOptions& opt = {})
{
  const auto in = e.inputs(m2, J);
  std::vector<CoefficientSet> out;
  out.reserve(in.size());
  for (int j = 0; j <= J; ++j) out.push_back(coefficient_set(in[j], n, e.options().L, j, m2, opt));
  return out;
}

// Torus data for scale j from a decomposition: w_j, w_{j+1} and C_{j+1} on a
// common torus large enough for C_{j+1}.
struct ScaleKernels {
  KernelGrid w, wp, c;
};

inline ScaleKernels scale_kernels(const ScaleDecomposition& d, int j, int side = 0)
{
  if (j < 0 || j + 1 > d.J_max) throw std::out_of_range("scale_kernels: need j+1 <= J_max");
  if (side == 0) side = static_cast<int>(std::min<double>(4.0 * std::pow(d.L, j + 1), d.M_cap));
  ScaleKernels k{KernelGrid(side, d.m2), KernelGrid(side, d.m2), KernelGrid(side, d.m2, j + 1)};
  for (int i = 1; i <= j; ++i) {
    const KernelGrid ci = d.torus_kernel(i, side);
    for (std::size_t x = 0; x < ci.size(); ++x) k.w.values[x] += ci.values[x];
  }
  k.c = d.torus_kernel(j + 1, side);
  for (std::size_t x = 0; x < k.c.size(); ++x) k.wp.values[x] = k.w.values[x] + k.c.values[x];
  return k;
}

inline PtInputs pt_inputs(const ScaleKernels& k)
{
  auto mom = [](const KernelGrid& g) {
    return torus_moments<double>(g.side, [&g](const Point& x) { return g(x); });
  };
  return pt_inputs(mom(k.w), mom(k.wp), mom(k.c));
}

inline CoefficientSet coefficient_set(const ScaleDecomposition& d, int j, int n, const FormulaOptions& opt = {})
{
  return coefficient_set(pt_inputs(scale_kernels(d, j)), n, d.L, j, d.m2, opt);
}

// The quartic combination written as sums of Taylor remainders:
// 4 sum w^3 (C_x - C_0 - x_1^2 Delta C_0 / 2) + 6 sum w^2 (C_x^2 - C_0^2) + 4 sum w C^3 + sum C^4.
inline double quartic_expanded(const KernelGrid& w, const KernelGrid& c)
{
  if (w.side != c.side) throw std::invalid_argument("quartic_expanded: grids on different tori");
  const Point o{0, 0, 0, 0};
  const double c0 = c(o);
  double dc0 = 0.0;
  for (int d = 0; d < kDim; ++d)
    for (int s : {-1, 1}) {
      Point e = o;
      e[d] = s;
      dc0 += c(e) - c0;
    }
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Point x = w.point(i);
    const double x1 = w.min_image(x[0]);
    const double wx = w.values[i], cx = c.values[i];
    total += 4.0 * wx * wx * wx * (cx - c0 - 0.5 * x1 * x1 * dc0) + 6.0 * wx * wx * (cx * cx - c0 * c0) +
             4.0 * wx * cx * cx * cx + cx * cx * cx * cx;
  }
  return total;
}

struct QuarticBoundReport {
  int j = 0;
  double value = 0.0;       // delta[w^(4)] - 4Cw^(3) - 2 Delta C (w^3)^(**) - 6C^2 w^(2)
  double printed = 0.0;     // same with +2 Delta C (w^3)^(**)
  double scaled = 0.0;      // |value| L^{4j} / chi_j
  double scaled_printed = 0.0;
};

inline std::vector<QuarticBoundReport> kappa_gg_bound_check(const HeatKernelEngine& e, double m2, int J,
                                                            double omega = 2.0)
{
  const int L = e.options().L;
  const auto in = e.inputs(m2, J);
  const MassScale jm = mass_scale(m2, L);
  std::vector<QuarticBoundReport> out;
  for (int j = 0; j <= J; ++j) {
    QuarticBoundReport r;
    r.j = j;
    r.value = in[j].E;
    r.printed = in[j].E + 4.0 * in[j].DC00 * in[j].w3ss;
    const double s = std::pow(static_cast<double>(L), 4.0 * j) / chi(j, jm, omega);
    r.scaled = std::abs(r.value) * s;
    r.scaled_printed = std::abs(r.printed) * s;
    out.push_back(r);
  }
  return out;
}

}  // namespace phi4
