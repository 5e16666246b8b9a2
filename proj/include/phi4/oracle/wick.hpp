#pragma once

// Gaussian calculus on field polynomials: L_C = (1/2) sum C_uv d_u . d_v,
// e^{+-L_C}, and the cross operator F_w computed two independent ways.

#include <functional>
#include <vector>

#include "polynomial.hpp"

namespace phi4::oracle {

// L_C P: every unordered pair of same-component positions contracts to C.
template <class S>
Polynomial<S> laplacian_action(const SmallTorus& T, const SmallKernel<S>& C, const Polynomial<S>& P)
{
  Polynomial<S> r;
  std::array<Var, kMaxDegree> rest;
  for (const auto& [m, c] : P.terms()) {
    for (int a = 0; a < m.deg; ++a)
      for (int b = a + 1; b < m.deg; ++b) {
        if (T.comp_of(m.v[a]) != T.comp_of(m.v[b])) continue;
        const S& k = C.at(T, T.site_of(m.v[a]), T.site_of(m.v[b]));
        if (k == S(0)) continue;
        int d = 0;
        for (int i = 0; i < m.deg; ++i)
          if (i != a && i != b) rest[d++] = m.v[i];
        r.add(make_monomial(std::span<const Var>(rest.data(), d)), c * k);
      }
  }
  return r;
}

// e^{sign L_C} P; sign = +1 is the Gaussian expectation over shifts.
template <class S>
Polynomial<S> wick_exponential(const SmallTorus& T, const SmallKernel<S>& C, const Polynomial<S>& P, int sign = 1)
{
  Polynomial<S> result = P, term = P;
  for (int k = 1; !term.empty(); ++k) {
    term = laplacian_action(T, C, term);
    term *= S(sign) / S(k);
    result += term;
  }
  return result;
}

// Gaussian expectation of a monomial by explicit perfect matchings.
template <class S>
S isserlis(const SmallTorus& T, const SmallKernel<S>& C, const Monomial& m)
{
  if (m.deg % 2) return S(0);
  std::vector<int> pos(m.deg);
  for (int i = 0; i < m.deg; ++i) pos[i] = i;
  std::function<S(std::vector<int>)> rec = [&](std::vector<int> left) -> S {
    if (left.empty()) return S(1);
    const int a = left.front();
    S total(0);
    for (std::size_t k = 1; k < left.size(); ++k) {
      const int b = left[k];
      if (T.comp_of(m.v[a]) != T.comp_of(m.v[b])) continue;
      const S& c = C.at(T, T.site_of(m.v[a]), T.site_of(m.v[b]));
      if (c == S(0)) continue;
      std::vector<int> next;
      for (std::size_t i = 1; i < left.size(); ++i)
        if (i != k) next.push_back(left[i]);
      total += c * rec(next);
    }
    return total;
  };
  return rec(pos);
}

template <class S>
S isserlis(const SmallTorus& T, const SmallKernel<S>& C, const Polynomial<S>& P)
{
  S total(0);
  for (const auto& [m, c] : P.terms()) total += c * isserlis(T, C, m);
  return total;
}

// Enumerate nonempty partial matchings between the positions of a and b that
// pair equal components. leaf(weight, rest_vars) is called once per
// matching; matchings that leave more than max_rest unmatched positions are skipped.
template <class S, class Leaf>
void cross_matchings(const SmallTorus& T, const SmallKernel<S>& w, const Monomial& a, const Monomial& b,
                     int max_rest, Leaf&& leaf)
{
  const int total = a.deg + b.deg;
  // each matched pair removes two positions
  const int min_pairs = std::max(1, (total - max_rest + 1) / 2);
  const int max_pairs = std::min<int>(a.deg, b.deg);
  if (min_pairs > max_pairs) return;
  std::array<bool, kMaxDegree> used_b{};
  std::array<Var, 2 * kMaxDegree> rest;
  int rest_a = 0;
  std::array<Var, kMaxDegree> a_rest;

  auto rec = [&](auto&& self, int i, int pairs, const S& weight) -> void {
    const int remaining_a = a.deg - i;
    if (pairs + std::min(remaining_a, max_pairs - pairs) < min_pairs) return;
    if (i == a.deg) {
      if (pairs < min_pairs) return;
      int d = 0;
      for (int k = 0; k < rest_a; ++k) rest[d++] = a_rest[k];
      for (int k = 0; k < b.deg; ++k)
        if (!used_b[k]) rest[d++] = b.v[k];
      leaf(weight, std::span<const Var>(rest.data(), d));
      return;
    }
    a_rest[rest_a++] = a.v[i];
    self(self, i + 1, pairs, weight);
    --rest_a;
    for (int k = 0; k < b.deg; ++k) {
      if (used_b[k] || T.comp_of(a.v[i]) != T.comp_of(b.v[k])) continue;
      const S& c = w.at(T, T.site_of(a.v[i]), T.site_of(b.v[k]));
      if (c == S(0)) continue;
      used_b[k] = true;
      self(self, i + 1, pairs + 1, weight * c);
      used_b[k] = false;
    }
  };
  rec(rec, 0, 0, S(1));
}

// F_w(A, B) = sum_{k>=1} (1/k!) (D_A . w . D_B)^k (A B), built from matchings.
template <class S>
Polynomial<S> cross_operator(const SmallTorus& T, const SmallKernel<S>& w, const Polynomial<S>& A,
                             const Polynomial<S>& B, int max_degree = kMaxDegree)
{
  Polynomial<S> r;
  for (const auto& [ma, ca] : A.terms())
    for (const auto& [mb, cb] : B.terms()) {
      const S c = ca * cb;
      cross_matchings(T, w, ma, mb, max_degree, [&](const S& weight, std::span<const Var> rest) {
        r.add(make_monomial(rest), c * weight);
      });
    }
  return r;
}

// F_w(A, B) = e^{L_w}(e^{-L_w}A e^{-L_w}B) - A B.
template <class S>
Polynomial<S> cross_operator_conjugation(const SmallTorus& T, const SmallKernel<S>& w, const Polynomial<S>& A,
                                         const Polynomial<S>& B)
{
  const Polynomial<S> a = wick_exponential(T, w, A, -1), b = wick_exponential(T, w, B, -1);
  return wick_exponential(T, w, a * b, +1) - A * B;
}

}  // namespace phi4::oracle
