#pragma once

// Localization onto {1, tau, tau_Delta, tau_nabla nabla, tau^2} by matching
// pairings against the isotropic polynomial test functions of dimension <= 4.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "polynomial.hpp"

namespace phi4::oracle {

inline constexpr int kLocBasis = 5;
template <class S>
using Pairings = std::array<S, kLocBasis>;

// Test functions, in order:
//   p = 0: 1
//   p = 2: delta_ij, delta_ij (|y1|^2 + |y2|^2), delta_ij (y1 . y2)
//   p = 4: delta_ij delta_kl + delta_ik delta_jl + delta_il delta_jk
// with y measured from the centre by minimum image.
template <class S>
void accumulate_pairing(const SmallTorus& T, int centre, const S& c, std::span<const Var> v, Pairings<S>& b)
{
  switch (v.size()) {
    case 0:
      b[0] += c;
      return;
    case 2: {
      if (T.comp_of(v[0]) != T.comp_of(v[1])) return;
      const Point y1 = T.coords(T.difference(T.site_of(v[0]), centre));
      const Point y2 = T.coords(T.difference(T.site_of(v[1]), centre));
      int sq = 0, dot = 0;
      for (int d = 0; d < kDim; ++d) {
        sq += y1[d] * y1[d] + y2[d] * y2[d];
        dot += y1[d] * y2[d];
      }
      b[1] += c;
      if (sq) b[2] += c * S(sq);
      if (dot) b[3] += c * S(dot);
      return;
    }
    case 4: {
      const int i = T.comp_of(v[0]), j = T.comp_of(v[1]), k = T.comp_of(v[2]), l = T.comp_of(v[3]);
      const int f = (i == j && k == l) + (i == k && j == l) + (i == l && j == k);
      if (f) b[4] += c * S(f);
      return;
    }
    default:
      return;
  }
}

template <class S>
Pairings<S> pairings(const SmallTorus& T, const Polynomial<S>& F, int centre = 0)
{
  Pairings<S> b{};
  for (const auto& [m, c] : F.terms()) accumulate_pairing(T, centre, c, m.vars(), b);
  return b;
}

// Pairings against test functions outside the isotropic set: odd degree,
// odd or anisotropic y-dependence, and off-diagonal components. All vanish
// for polynomials invariant under the lattice symmetries and O(n).
template <class S>
std::vector<S> extended_pairings(const SmallTorus& T, const Polynomial<S>& F, int centre = 0)
{
  std::vector<S> r(7, S(0));
  for (const auto& [m, c] : F.terms()) {
    std::array<Point, kMaxDegree> y{};
    for (int k = 0; k < m.deg; ++k) y[k] = T.coords(T.difference(T.site_of(m.v[k]), centre));
    auto comp = [&](int k) { return T.comp_of(m.v[k]); };
    if (m.deg == 1) {
      if (comp(0) == 0) {
        r[0] += c;
        r[1] += c * S(y[0][0]);
      }
    } else if (m.deg == 2) {
      if (comp(0) == comp(1)) {
        r[2] += c * S(y[0][0] + y[1][0]);
        r[3] += c * S(y[0][0] * y[1][1] + y[0][1] * y[1][0]);
        r[4] += c * S(y[0][0] * y[0][0] + y[1][0] * y[1][0] - y[0][1] * y[0][1] - y[1][1] * y[1][1]);
      } else if ((comp(0) == 0 && comp(1) == 1) || (comp(0) == 1 && comp(1) == 0)) {
        r[5] += c;
      }
    } else if (m.deg == 3) {
      // delta_{i1 i2} [i3 = 0], symmetrized
      const int f = (comp(0) == comp(1) && comp(2) == 0) + (comp(0) == comp(2) && comp(1) == 0) +
                    (comp(1) == comp(2) && comp(0) == 0);
      if (f) r[6] += c * S(f);
    }
  }
  return r;
}

template <class S>
Polynomial<S> basis_polynomial(const SmallTorus& T, int k, int x)
{
  switch (k) {
    case 0: return Polynomial<S>(S(1));
    case 1: return tau<S>(T, x);
    case 2: return tau_delta<S>(T, x);
    case 3: return tau_gradgrad<S>(T, x);
    case 4: return tau_squared<S>(T, x);
  }
  throw std::out_of_range("basis_polynomial: index");
}

template <class S>
Pairings<S> solve_pairings(std::array<Pairings<S>, kLocBasis> M, Pairings<S> b)
{
  constexpr int N = kLocBasis;
  for (int col = 0; col < N; ++col) {
    int piv = col;
    for (int r = col + 1; r < N; ++r)
      if (std::abs(to_double(M[r][col])) > std::abs(to_double(M[piv][col]))) piv = r;
    if (M[piv][col] == S(0)) throw std::runtime_error("localization system is singular");
    std::swap(M[piv], M[col]);
    std::swap(b[piv], b[col]);
    for (int r = 0; r < N; ++r) {
      if (r == col || M[r][col] == S(0)) continue;
      const S f = M[r][col] / M[col][col];
      for (int k = col; k < N; ++k) M[r][k] -= f * M[col][k];
      b[r] -= f * b[col];
    }
  }
  Pairings<S> a{};
  for (int k = 0; k < N; ++k) a[k] = b[k] / M[k][k];
  return a;
}

// Loc_X from the pairings b of F, with basis polynomials summed over X and
// test coordinates measured from X.front().
template <class S>
LocalU<S> loc_from_pairings(const SmallTorus& T, const Pairings<S>& b, const std::vector<int>& X = {0})
{
  if (X.empty()) throw std::invalid_argument("loc: empty block");
  std::array<Pairings<S>, kLocBasis> M{};  // M[test][basis]
  for (int k = 0; k < kLocBasis; ++k) {
    Polynomial<S> P;
    for (int x : X) P += basis_polynomial<S>(T, k, x);
    const Pairings<S> col = pairings(T, P, X.front());
    for (int l = 0; l < kLocBasis; ++l) M[l][k] = col[l];
  }
  const Pairings<S> a = solve_pairings(M, b);
  return LocalU<S>{a[4], a[1], a[2], a[3], a[0]};
}

template <class S>
LocalU<S> loc(const SmallTorus& T, const Polynomial<S>& F, const std::vector<int>& X = {0})
{
  if (X.empty()) throw std::invalid_argument("loc: empty block");
  return loc_from_pairings(T, pairings(T, F, X.front()), X);
}

template <class S>
Polynomial<S> loc_polynomial(const SmallTorus& T, const LocalU<S>& U, const std::vector<int>& X = {0})
{
  Polynomial<S> p;
  for (int x : X) p += local_polynomial(T, x, U);
  return p;
}

}  // namespace phi4::oracle
