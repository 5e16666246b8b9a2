#include <gtest/gtest.h>

#include <random>

#include "phi4/oracle/dimension.hpp"
#include "phi4/oracle/loc.hpp"
#include "phi4/oracle/upt.hpp"
#include "phi4/oracle/wick.hpp"

using namespace phi4;
using namespace phi4::oracle;
using R = Rational;

namespace {

bool same(const LocalU<R>& a, const LocalU<R>& b)
{
  return a.g == b.g && a.nu == b.nu && a.z == b.z && a.y == b.y && a.u == b.u;
}

Polynomial<R> phi(const SmallTorus& T, int s, int i) { return variable<R>(T, s, i); }

// Random O(n)- and lattice-invariant polynomial at the origin of degree <= 4.
Polynomial<R> invariant_sample(const SmallTorus& T, std::mt19937_64& rng)
{
  const LocalU<R> U = random_couplings<R>(rng);
  const int e = T.site({1, 0, 0, 0});
  return local_polynomial(T, 0, U) + tau<R>(T, 0) * tau<R>(T, e) * R(3, 7);
}

// phi^i -> sum_j M_ij phi^j for n = 2 with a rational rotation.
Polynomial<R> rotate(const SmallTorus& T, const Polynomial<R>& P)
{
  const R c(3, 5), s(4, 5);
  Polynomial<R> out;
  for (const auto& [m, coef] : P.terms()) {
    Polynomial<R> term(coef);
    for (Var v : m.vars()) {
      const int site = T.site_of(v);
      term = term * (T.comp_of(v) == 0 ? phi(T, site, 0) * c - phi(T, site, 1) * s
                                       : phi(T, site, 0) * s + phi(T, site, 1) * c);
    }
    out += term;
  }
  return out;
}

}  // namespace

TEST(Wick, LaplacianOnTau)
{
  const SmallTorus T(3, 3);
  std::mt19937_64 rng(1);
  const auto C = random_isotropic_kernel<R>(3, 1, rng);
  const Polynomial<R> L = laplacian_action(T, C, tau<R>(T, 4));
  EXPECT_EQ(L, Polynomial<R>(R(3) * C.values[0] / R(2)));
  EXPECT_TRUE(laplacian_action(T, C, variable<R>(T, 2, 1)).empty());
}

TEST(Wick, CovarianceOfPairs)
{
  const SmallTorus T(5, 2);
  std::mt19937_64 rng(2);
  const auto C = random_isotropic_kernel<R>(5, 1, rng);
  const int x = 0, y = T.site({1, 0, 0, 0});
  const Polynomial<R> P = phi(T, x, 1) * phi(T, y, 1);
  EXPECT_EQ(wick_exponential(T, C, P), P + Polynomial<R>(C.at(T, x, y)));
  EXPECT_EQ(wick_exponential(T, C, phi(T, x, 0) * phi(T, y, 1)), phi(T, x, 0) * phi(T, y, 1));
}

TEST(Wick, QuarticMomentMatchesIsserlis)
{
  for (int n : {1, 2, 3}) {
    const SmallTorus T(3, n);
    std::mt19937_64 rng(3 + n);
    const auto C = random_isotropic_kernel<R>(3, 1, rng);
    const Polynomial<R> t2 = tau_squared<R>(T, 0);
    const R expected = R(n * n + 2 * n) * C.values[0] * C.values[0] / R(4);
    EXPECT_EQ(wick_exponential(T, C, t2).constant(), expected) << "n = " << n;
    EXPECT_EQ(isserlis(T, C, t2), expected) << "n = " << n;
    const Polynomial<R> mixed = t2 * tau<R>(T, T.site({1, 1, 0, 0}));
    EXPECT_EQ(isserlis(T, C, mixed), wick_exponential(T, C, mixed).constant());
  }
}

TEST(Wick, SemigroupAndInverse)
{
  const SmallTorus T(5, 2);
  std::mt19937_64 rng(5);
  const auto C1 = random_isotropic_kernel<R>(5, 1, rng);
  const auto C2 = random_isotropic_kernel<R>(5, 2, rng);
  const Polynomial<R> P = invariant_sample(T, rng) * Polynomial<R>(R(1)) + tau<R>(T, 7) * tau_delta<R>(T, 0);
  EXPECT_EQ(wick_exponential(T, C1, wick_exponential(T, C2, P)), wick_exponential(T, C1 + C2, P));
  EXPECT_EQ(wick_exponential(T, C2, wick_exponential(T, C2, P, +1), -1), P);
}

TEST(CrossOperator, TwoRoutesAgree)
{
  const SmallTorus T(5, 2);
  std::mt19937_64 rng(6);
  const auto w = random_isotropic_kernel<R>(5, 1, rng);
  const Polynomial<R> A = invariant_sample(T, rng);
  const Polynomial<R> B = translate(T, invariant_sample(T, rng), {0, 1, 1, 0});
  EXPECT_EQ(cross_operator(T, w, A, B), cross_operator_conjugation(T, w, A, B));
  EXPECT_EQ(cross_operator(T, w, A, B), cross_operator(T, w, B, A));
}

TEST(CrossOperator, LowDegreeCases)
{
  const int n = 3;
  const SmallTorus T(5, n);
  std::mt19937_64 rng(7);
  const auto w = random_isotropic_kernel<R>(5, 1, rng);
  const int x = 0, y = T.site({1, 0, 0, 0});
  EXPECT_EQ(cross_operator(T, w, phi(T, x, 1), phi(T, y, 1)), Polynomial<R>(w.at(T, x, y)));
  EXPECT_TRUE(cross_operator(T, w, phi(T, x, 1), phi(T, y, 2)).empty());
  Polynomial<R> dot;
  for (int i = 0; i < n; ++i) dot += phi(T, x, i) * phi(T, y, i);
  const R wxy = w.at(T, x, y);
  EXPECT_EQ(cross_operator(T, w, tau<R>(T, x), tau<R>(T, y)), dot * wxy + Polynomial<R>(R(n) * wxy * wxy / R(2)));
}

TEST(Loc, GoldenIdentities)
{
  const SmallTorus T(7, 2);
  const std::vector<int> X{0, T.site({0, 1, 0, 0}), T.site({1, 1, 0, 0})};
  const LocalU<R> l4 = loc(T, tau_squared<R>(T, X[1]), X);
  EXPECT_TRUE(same(l4, LocalU<R>{R(1, 3), 0, 0, 0, 0}));
  EXPECT_TRUE(same(loc(T, tau<R>(T, 0) * tau_squared<R>(T, 0)), LocalU<R>{}));

  std::mt19937_64 rng(8);
  const auto q = random_isotropic_kernel<R>(7, 2, rng);
  const KernelMomentsT<R> mq = small_moments(q);
  Polynomial<R> F;
  for (int s = 0; s < T.sites(); ++s) F += tau<R>(T, s) * q.values[T.difference(0, s)];
  EXPECT_TRUE(same(loc(T, F), LocalU<R>{0, mq.w1, -mq.wss, mq.wss, 0}));
}

TEST(Loc, ProjectionProperties)
{
  const SmallTorus T(7, 2);
  std::mt19937_64 rng(9);
  const auto w = random_isotropic_kernel<R>(7, 1, rng);
  const Polynomial<R> V0 = invariant_sample(T, rng);
  const Polynomial<R> G = cross_operator(T, w, V0, translate(T, V0, {1, 0, 0, 0})) + V0;
  const LocalU<R> once = loc(T, G);
  EXPECT_TRUE(same(loc(T, loc_polynomial(T, once)), once));
  for (const R& v : pairings(T, G - loc_polynomial(T, once))) EXPECT_EQ(v, R(0));
  EXPECT_TRUE(same(loc(T, rotate(T, G)), once));
}

TEST(Loc, SingularWindowIsRejected)
{
  const SmallTorus T(5, 1);
  EXPECT_THROW(loc(T, tau<R>(T, 0), {}), std::invalid_argument);
}

TEST(Dimension, Classification)
{
  EXPECT_EQ(monomial_dimension(named_monomial("tau")).dimension, 2);
  EXPECT_EQ(monomial_dimension(named_monomial("tau")).relevance, Relevance::relevant);
  EXPECT_EQ(monomial_dimension(named_monomial("1")).relevance, Relevance::relevant);
  for (const char* m : {"tau^2", "tau_delta", "tau_gradgrad"}) {
    EXPECT_EQ(monomial_dimension(named_monomial(m)).dimension, 4) << m;
    EXPECT_EQ(monomial_dimension(named_monomial(m)).relevance, Relevance::marginal) << m;
  }
  EXPECT_EQ(monomial_dimension(named_monomial("tau^3")).dimension, 6);
  EXPECT_EQ(monomial_dimension(named_monomial("tau^3")).relevance, Relevance::irrelevant);
  EXPECT_EQ(monomial_dimension(MonomialDescriptor::fields(2, 3, 1)).relevance, Relevance::irrelevant);
  EXPECT_STREQ(to_string(Relevance::marginal), "marginal");
  EXPECT_THROW(named_monomial("tau^4"), std::invalid_argument);
  EXPECT_THROW(MonomialDescriptor::fields(1, 2, 0), std::invalid_argument);
}

TEST(Upt, ZeroInputGivesZero)
{
  const SmallTorus T(7, 1);
  std::mt19937_64 rng(10);
  const auto w = random_isotropic_kernel<R>(7, 1, rng);
  const auto c = random_isotropic_kernel<R>(7, 1, rng);
  EXPECT_TRUE(same(u_pt_oracle(T, LocalU<R>{}, w, c), LocalU<R>{}));
}

TEST(Upt, QuarticOnlyInput)
{
  const SmallTorus T(7, 2);
  std::mt19937_64 rng(11);
  const auto w = random_isotropic_kernel<double>(7, 1, rng);
  const auto c = random_isotropic_kernel<double>(7, 1, rng);
  const double g = 0.05;
  const LocalU<double> o = u_pt_oracle(T, LocalU<double>{g, 0, 0, 0, 0}, w, c);
  const PtInputs p = pt_inputs(small_moments(w), small_moments(w + c), small_moments(c));
  const double beta = 10.0 * p.d_w2, eta = 4.0 * p.C00;
  EXPECT_NEAR(o.g, g - beta * g * g - 4.0 * eta * p.w1p * g * g, 1e-12);
}

TEST(Upt, MatchesFormulasInDouble)
{
  std::mt19937_64 rng(12);
  for (int range : {1, 2}) {
    const int side = minimal_oracle_side(range);
    const auto w = random_isotropic_kernel<double>(side, range, rng);
    const auto c = random_isotropic_kernel<double>(side, range, rng);
    const auto V = random_couplings<double>(rng);
    for (int n : {1, 3}) EXPECT_LT(compare_u_pt(SmallTorus(side, n), V, w, c).max_error(), 1e-10);
  }
}

TEST(Upt, MatchesFormulasExactly)
{
  std::mt19937_64 rng(13);
  const auto w = random_isotropic_kernel<R>(7, 1, rng);
  const auto c = random_isotropic_kernel<R>(7, 1, rng);
  const auto V = random_couplings<R>(rng);
  const SmallTorus T(7, 2);
  const LocalU<R> a = u_pt_oracle(T, V, w, c), f = u_pt_formula(2, V, w, c);
  EXPECT_EQ(a.g, f.g);
  EXPECT_EQ(a.nu, f.nu);
  EXPECT_EQ(a.z + a.y, f.z + f.y);
  EXPECT_EQ(a.u, f.u);
}

TEST(Upt, SymmetryReductionIsExact)
{
  std::mt19937_64 rng(14);
  const auto w = random_isotropic_kernel<R>(7, 1, rng);
  const auto c = random_isotropic_kernel<R>(7, 1, rng);
  const auto V = random_couplings<R>(rng);
  const SmallTorus T(7, 1);
  EXPECT_TRUE(same(u_pt_oracle(T, V, w, c, true), u_pt_oracle(T, V, w, c, false)));
}

TEST(Upt, RangeGuard)
{
  std::mt19937_64 rng(15);
  const auto w = random_isotropic_kernel<double>(5, 1, rng);
  const auto w7 = random_isotropic_kernel<double>(7, 1, rng);
  const auto V = random_couplings<double>(rng);
  EXPECT_EQ(minimal_oracle_side(1), 7);
  EXPECT_THROW(u_pt_oracle(SmallTorus(5, 1), V, w, w), std::invalid_argument);
  EXPECT_THROW(u_pt_oracle(SmallTorus(7, 1), V, w, w7), std::invalid_argument);
  EXPECT_NO_THROW(u_pt_oracle(SmallTorus(5, 1), V, w, w, true, true));
}

TEST(Upt, PolynomialInComponentCount)
{
  std::mt19937_64 rng(16);
  const auto w = random_isotropic_kernel<double>(7, 1, rng);
  const auto c = random_isotropic_kernel<double>(7, 1, rng);
  const auto V = random_couplings<double>(rng);
  const PolynomialityReport r = n_polynomiality(7, V, w, c);
  EXPECT_LT(r.max_prediction_error, 1e-10);
  EXPECT_LT(r.du_at_zero, 1e-10);
  EXPECT_NEAR(r.beta_slope, r.beta_slope_ref, 1e-10);
  EXPECT_LT(r.beta_curvature, 1e-10);
}
