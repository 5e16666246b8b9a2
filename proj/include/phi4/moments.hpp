#pragma once

// Kernel moments entering the perturbative flow, and the per-scale inputs
// (w = w_j, w_+ = w_{j+1}, C = C_{j+1}) from which every coefficient is built.

#include <cmath>
#include <stdexcept>
#include <string>

#include "lattice.hpp"

namespace phi4 {

template <class S>
struct KernelMomentsT {
  S w1{}, w2{}, w3{}, w4{};   // q^(p) = sum_x q_x^p
  S wss{};                    // q^(**) = sum_x x_1^2 q_x
  S w2ss{}, w3ss{};           // (q^2)^(**), (q^3)^(**)
  S grad2ss{};                // ((nabla q)^2)^(**), (nabla q)^2 = 1/2 sum_e (nabla^e q)^2
  S wDwss{}, wDw1{};          // (q Delta q)^(**), (q Delta q)^(1)
  S Dw2{};                    // (Delta q)^(2)
  S origin{}, Dorigin{};      // q_0, (Delta q)_0
};
using KernelMoments = KernelMomentsT<double>;

struct IsotropyReport {
  double max_offdiagonal = 0.0;
  double max_diagonal_spread = 0.0;
  double odd_first_moment = 0.0;
};

// Real-space torus sums with minimum-image coordinates; q is indexed by
// points of (Z/MZ)^4 through any integer representative.
template <class S, class Q>
KernelMomentsT<S> torus_moments(int side, Q&& q)
{
  KernelMomentsT<S> m;
  auto wrap = [side](int a) { return ((a % side) + side) % side; };
  auto mi = [side, &wrap](int a) {
    const int r = wrap(a);
    return r > side / 2 ? r - side : r;
  };
  auto lap = [&](const Point& x) {
    S s{};
    const S c = q(x);
    for (int d = 0; d < kDim; ++d)
      for (int sg : {-1, 1}) {
        Point y = x;
        y[d] = wrap(y[d] + sg);
        s += q(y) - c;
      }
    return s;
  };
  Point x{};
  for (x[0] = 0; x[0] < side; ++x[0])
    for (x[1] = 0; x[1] < side; ++x[1])
      for (x[2] = 0; x[2] < side; ++x[2])
        for (x[3] = 0; x[3] < side; ++x[3]) {
          const S v = q(x);
          const int x1 = mi(x[0]);
          const S xx = S(x1 * x1);
          const S v2 = v * v, v3 = v2 * v;
          const S dv = lap(x);
          m.w1 += v;
          m.w2 += v2;
          m.w3 += v3;
          m.w4 += v3 * v;
          m.wss += xx * v;
          m.w2ss += xx * v2;
          m.w3ss += xx * v3;
          m.wDwss += xx * v * dv;
          m.wDw1 += v * dv;
          m.Dw2 += dv * dv;
          S g{};
          for (int d = 0; d < kDim; ++d)
            for (int sg : {-1, 1}) {
              Point y = x;
              y[d] = wrap(y[d] + sg);
              const S e = q(y) - v;
              g += e * e;
            }
          m.grad2ss += xx * g / S(2);
        }
  m.origin = q(Point{0, 0, 0, 0});
  m.Dorigin = lap(Point{0, 0, 0, 0});
  return m;
}

// Smallest R such that |x|_inf <= R holds a fraction 1 - tol of sum |q|.
inline int effective_range(const KernelGrid& g, double tol = 1e-6)
{
  const int half = g.side / 2;
  std::vector<double> shell(half + 1, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point x = g.point(i);
    int r = 0;
    for (int d = 0; d < kDim; ++d) r = std::max(r, std::abs(g.min_image(x[d])));
    shell[r] += std::abs(g.values[i]);
    total += std::abs(g.values[i]);
  }
  double acc = 0.0;
  for (int r = 0; r <= half; ++r) {
    acc += shell[r];
    if (acc >= (1.0 - tol) * total) return r;
  }
  return half;
}

inline KernelMoments moments(const KernelGrid& g, double range_tol = 1e-6)
{
  const int r = effective_range(g, range_tol);
  if (g.side <= 2 * r)
    throw std::invalid_argument("moments: torus side " + std::to_string(g.side) +
                                " does not exceed twice the effective range " + std::to_string(r));
  return torus_moments<double>(g.side, [&g](const Point& x) { return g(x); });
}

inline IsotropyReport isotropy(const KernelGrid& g)
{
  double m[kDim][kDim] = {};
  double first[kDim] = {};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point p = g.point(i);
    int x[kDim];
    for (int d = 0; d < kDim; ++d) x[d] = g.min_image(p[d]);
    // the antipodal plane of an even torus is symmetric only as a set
    bool edge = false;
    for (int d = 0; d < kDim; ++d) edge = edge || (g.side % 2 == 0 && std::abs(x[d]) == g.side / 2);
    const double v = g.values[i];
    for (int a = 0; a < kDim; ++a) {
      if (!edge) first[a] += v * x[a];
      for (int b = 0; b < kDim; ++b)
        if (a == b || !edge) m[a][b] += v * x[a] * x[b];
    }
  }
  IsotropyReport r;
  double lo = m[0][0], hi = m[0][0];
  for (int a = 0; a < kDim; ++a) {
    lo = std::min(lo, m[a][a]);
    hi = std::max(hi, m[a][a]);
    r.odd_first_moment = std::max(r.odd_first_moment, std::abs(first[a]));
    for (int b = 0; b < kDim; ++b)
      if (a != b) r.max_offdiagonal = std::max(r.max_offdiagonal, std::abs(m[a][b]));
  }
  r.max_diagonal_spread = hi - lo;
  return r;
}

// n-independent inputs of the flow formulas at one scale.
template <class S>
struct PtInputsT {
  S C00{}, DC00{};            // C_{0,0}, (Delta C)_{0,0} of C = C_{j+1}
  S w1{}, w1p{};              // w^(1) of w and w_+
  S wss{}, wssp{};            // w^(**)
  S w2ss{}, w2ssp{};          // (w^2)^(**)
  S w2{};                     // w^(2)
  S w3ss{};                   // (w^3)^(**)
  S d_w2{}, d_w3ss{};         // delta[w^(2)], delta[(w^3)^(**)]
  S X3{};                     // delta[w^(3)] - 3 w^(2) C
  S d_wDw1{}, d_wDwss{};      // delta[(w Delta w)^(1)], delta[(w Delta w)^(**)]
  S d_grad{};                 // delta[((nabla w)^2)^(**)]
  S d_Dw2{};                  // delta[(Delta w)^(2)]
  S E{};                      // delta[w^(4)] - 4 C w^(3) - 2 Delta C (w^3)^(**) - 6 C^2 w^(2)
};
using PtInputs = PtInputsT<double>;

template <class S>
PtInputsT<S> pt_inputs(const KernelMomentsT<S>& w, const KernelMomentsT<S>& wp, const KernelMomentsT<S>& c)
{
  PtInputsT<S> p;
  p.C00 = c.origin;
  p.DC00 = c.Dorigin;
  p.w1 = w.w1;
  p.w1p = wp.w1;
  p.wss = w.wss;
  p.wssp = wp.wss;
  p.w2ss = w.w2ss;
  p.w2ssp = wp.w2ss;
  p.w2 = w.w2;
  p.w3ss = w.w3ss;
  p.d_w2 = wp.w2 - w.w2;
  p.d_w3ss = wp.w3ss - w.w3ss;
  p.X3 = (wp.w3 - w.w3) - S(3) * w.w2 * p.C00;
  p.d_wDw1 = wp.wDw1 - w.wDw1;
  p.d_wDwss = wp.wDwss - w.wDwss;
  p.d_grad = wp.grad2ss - w.grad2ss;
  p.d_Dw2 = wp.Dw2 - w.Dw2;
  p.E = (wp.w4 - w.w4) - S(4) * p.C00 * w.w3 - S(2) * p.DC00 * w.w3ss - S(6) * p.C00 * p.C00 * w.w2;
  return p;
}

}  // namespace phi4
