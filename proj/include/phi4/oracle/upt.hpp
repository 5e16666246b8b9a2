#pragma once

// Brute-force U_pt on a small torus, compared with the closed-form
// coefficient formulas evaluated from the same kernels.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "../coefficients.hpp"
#include "../flow.hpp"
#include "loc.hpp"
#include "wick.hpp"

namespace phi4::oracle {

struct Orbit {
  Point rep;
  int size = 0;
};

// Offsets of the torus grouped by hyperoctahedral orbit.
inline std::vector<Orbit> offset_orbits(const SmallTorus& T)
{
  std::map<Point, Orbit> by_key;
  for (int s = 0; s < T.sites(); ++s) {
    const Point x = T.coords(s);
    Orbit& o = by_key[orbit_key(x)];
    if (o.size == 0) o.rep = x;
    ++o.size;
  }
  std::vector<Orbit> out;
  out.reserve(by_key.size());
  for (auto& [k, o] : by_key) out.push_back(o);
  return out;
}

// Pairings of sum_y F_w(A_0, A_y) with A_y the translate of A by y. With
// use_symmetry the sum runs over one offset per orbit times the orbit size,
// which is exact when A and w are invariant under the lattice symmetries
// fixing the origin.
template <class S>
Pairings<S> summed_cross_pairings(const SmallTorus& T, const SmallKernel<S>& w, const Polynomial<S>& A,
                                  bool use_symmetry = true)
{
  std::vector<Orbit> ys;
  if (use_symmetry) {
    ys = offset_orbits(T);
  } else {
    for (int s = 0; s < T.sites(); ++s) ys.push_back({T.coords(s), 1});
  }
  Pairings<S> b{};
  for (const Orbit& o : ys) {
    const Polynomial<S> B = translate(T, A, o.rep);
    const S mult(o.size);
    for (const auto& [ma, ca] : A.terms())
      for (const auto& [mb, cb] : B.terms()) {
        const S c = ca * cb * mult;
        cross_matchings(T, w, ma, mb, 4, [&](const S& weight, std::span<const Var> rest) {
          accumulate_pairing(T, 0, c * weight, rest, b);
        });
      }
  }
  return b;
}

template <class S>
LocalU<S> operator-(const LocalU<S>& a, const LocalU<S>& b)
{
  return {a.g - b.g, a.nu - b.nu, a.z - b.z, a.y - b.y, a.u - b.u};
}

// Smallest torus side on which U_pt for kernels of range r sees no wrap-around
// (range plus two gradient steps on either side of the origin).
inline int minimal_oracle_side(int range) { return 2 * range + 5; }

// Loc_0(e^{L_C} V_0) - (1/2) Loc_0 F_{w+C}(e^{L_C} V_0, e^{L_C} V(Lambda))
//   + (1/2) e^{L_C} Loc_0 F_w(V_0, V(Lambda)), Loc applied once more to the last term.
// allow_wrap evaluates on tori below the minimal side, where the result is
// the periodised quantity rather than the infinite-volume one.
template <class S>
LocalU<S> u_pt_oracle(const SmallTorus& T, const LocalU<S>& V, const SmallKernel<S>& w, const SmallKernel<S>& c,
                      bool use_symmetry = true, bool allow_wrap = false)
{
  if (w.side != T.side || c.side != T.side) throw std::invalid_argument("u_pt_oracle: kernels on a different torus");
  const int range = std::max(w.range, c.range);
  if (!allow_wrap && T.side < minimal_oracle_side(range))
    throw std::invalid_argument("u_pt_oracle: torus side " + std::to_string(T.side) + " below " +
                                std::to_string(minimal_oracle_side(range)) + " for kernel range " +
                                std::to_string(range));
  const Polynomial<S> V0 = local_polynomial(T, 0, V);
  const Polynomial<S> eV0 = wick_exponential(T, c, V0, +1);
  const LocalU<S> linear = loc(T, eV0);
  const LocalU<S> second = loc_from_pairings(T, summed_cross_pairings(T, w + c, eV0, use_symmetry));
  const LocalU<S> inner = loc_from_pairings(T, summed_cross_pairings(T, w, V0, use_symmetry));
  const LocalU<S> third = loc(T, wick_exponential(T, c, local_polynomial(T, 0, inner), +1));
  const S half = S(1) / S(2);
  return LocalU<S>{linear.g - half * second.g + half * third.g, linear.nu - half * second.nu + half * third.nu,
                   linear.z - half * second.z + half * third.z, linear.y - half * second.y + half * third.y,
                   linear.u - half * second.u + half * third.u};
}

template <class S>
KernelMomentsT<S> small_moments(const SmallKernel<S>& k)
{
  const SmallTorus T(k.side, 1);
  return torus_moments<S>(k.side, [&](const Point& x) { return k.values[T.site(x)]; });
}

// Closed-form U_pt from the moments of the same kernels; the u slot holds
// u + delta u_pt so that it lines up with the oracle.
template <class S>
LocalU<S> u_pt_formula(int n, const LocalU<S>& V, const SmallKernel<S>& w, const SmallKernel<S>& c,
                       const FormulaOptions& opt = {})
{
  const PtInputsT<S> p = pt_inputs(small_moments(w), small_moments(w + c), small_moments(c));
  const CoefficientSetT<S> cs = coefficient_set<S>(p, n, 2, 0, 0.0, opt);
  const CouplingVectorT<S> r = u_pt<S>(CouplingVectorT<S>{V.g, V.nu, V.z, V.y, S(0)}, cs);
  return LocalU<S>{r.g, r.nu, r.z, r.y, V.u + r.u};
}

struct OracleComparison {
  int side = 0;
  int n = 0;
  int range = 0;
  LocalU<double> oracle, formula;
  double err_g = 0, err_nu = 0, err_zy = 0, err_z = 0, err_y = 0, err_u = 0;
  double max_error() const { return std::max({err_g, err_nu, err_zy, err_u}); }
};

template <class S>
OracleComparison compare_u_pt(const SmallTorus& T, const LocalU<S>& V, const SmallKernel<S>& w,
                              const SmallKernel<S>& c, const FormulaOptions& opt = {}, bool allow_wrap = false)
{
  const LocalU<S> o = u_pt_oracle(T, V, w, c, true, allow_wrap);
  const LocalU<S> f = u_pt_formula(T.n, V, w, c, opt);
  auto d = [](const LocalU<S>& u) {
    return LocalU<double>{to_double(u.g), to_double(u.nu), to_double(u.z), to_double(u.y), to_double(u.u)};
  };
  OracleComparison r;
  r.side = T.side;
  r.n = T.n;
  r.range = std::max(w.range, c.range);
  r.oracle = d(o);
  r.formula = d(f);
  r.err_g = std::abs(to_double(o.g - f.g));
  r.err_nu = std::abs(to_double(o.nu - f.nu));
  r.err_z = std::abs(to_double(o.z - f.z));
  r.err_y = std::abs(to_double(o.y - f.y));
  r.err_zy = std::abs(to_double((o.z + o.y) - (f.z + f.y)));
  r.err_u = std::abs(to_double(o.u - f.u));
  return r;
}

template <class S>
LocalU<S> random_couplings(std::mt19937_64& rng)
{
  std::uniform_int_distribution<int> k(-8, 8);
  auto draw = [&](int denom) { return S(k(rng)) / S(denom); };
  LocalU<S> V{draw(32), draw(16), draw(32), draw(32), draw(8)};
  if (V.g == S(0)) V.g = S(1) / S(16);
  return V;
}

struct PolynomialityReport {
  std::array<LocalU<double>, 6> values{};  // n = 0 unused, 1..5
  LocalU<double> predicted5{};             // cubic through n = 1..4
  LocalU<double> at_zero{};                // same cubic at n = 0 (delta u part)
  double max_prediction_error = 0.0;
  double du_at_zero = 0.0;
  double beta_slope = 0.0;      // d/dn of -(g_pt - g)/g^2 with V = g tau^2
  double beta_slope_ref = 0.0;  // delta[w^(2)] + 4 C w_+^(1), from g_pt at nu = 0
  double beta_curvature = 0.0;  // second difference of the same
};

// Cubic through (1..4) evaluated at x.
inline double cubic_through(const std::array<double, 4>& y, double x)
{
  double r = 0.0;
  for (int i = 0; i < 4; ++i) {
    double l = 1.0;
    for (int k = 0; k < 4; ++k)
      if (k != i) l *= (x - (k + 1)) / static_cast<double>(i - k);
    r += l * y[i];
  }
  return r;
}

inline PolynomialityReport n_polynomiality(int side, const LocalU<double>& V, const SmallKernel<double>& w,
                                           const SmallKernel<double>& c)
{
  PolynomialityReport rep;
  std::array<double, 6> beta{};
  const LocalU<double> Vg{V.g, 0.0, 0.0, 0.0, 0.0};
  for (int n = 1; n <= 5; ++n) {
    const SmallTorus T(side, n);
    rep.values[n] = u_pt_oracle(T, V, w, c);
    beta[n] = -(u_pt_oracle(T, Vg, w, c).g - V.g) / (V.g * V.g);
  }
  auto fields = [](LocalU<double>& u) { return std::array<double*, 5>{&u.g, &u.nu, &u.z, &u.y, &u.u}; };
  for (int f = 0; f < 5; ++f) {
    std::array<double, 4> y{};
    for (int n = 1; n <= 4; ++n) y[n - 1] = *fields(rep.values[n])[f];
    *fields(rep.predicted5)[f] = cubic_through(y, 5.0);
    *fields(rep.at_zero)[f] = cubic_through(y, 0.0);
    rep.max_prediction_error =
        std::max(rep.max_prediction_error, std::abs(*fields(rep.predicted5)[f] - *fields(rep.values[5])[f]));
  }
  rep.du_at_zero = std::abs(rep.at_zero.u - V.u);
  rep.beta_slope = beta[2] - beta[1];
  rep.beta_curvature = std::max({std::abs(beta[3] - 2 * beta[2] + beta[1]), std::abs(beta[4] - 2 * beta[3] + beta[2]),
                                 std::abs(beta[5] - 2 * beta[4] + beta[3])});
  const PtInputs p = pt_inputs(small_moments(w), small_moments(w + c), small_moments(c));
  rep.beta_slope_ref = p.d_w2 + 4.0 * p.C00 * p.w1p;
  return rep;
}

}  // namespace phi4::oracle
