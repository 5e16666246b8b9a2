#include <gtest/gtest.h>

#include <cmath>

#include "phi4/coefficients.hpp"

using namespace phi4;

namespace {

const HeatKernelEngine& engine() { return *shared_engine({}); }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST(Coefficients, ZeroComponentsKillVacuumCoefficients)
{
  const auto t = coefficient_table(engine(), 1e-3, 0, 12);
  for (const CoefficientSet& c : t) {
    EXPECT_EQ(c.kappa_g, 0.0);
    EXPECT_EQ(c.kappa_nu_p, 0.0);
    EXPECT_EQ(c.kappa_z, 0.0);
    EXPECT_EQ(c.kappa_znu_p, 0.0);
    EXPECT_EQ(c.kappa_gg, 0.0);
    EXPECT_EQ(c.kappa_nunu_p, 0.0);
    EXPECT_EQ(c.kappa_zz, 0.0);
    EXPECT_EQ(c.kappa_gnu_p, 0.0);
    EXPECT_EQ(c.kappa_gz, 0.0);
    EXPECT_DOUBLE_EQ(c.beta, 8.0 * c.in.d_w2);
  }
}

TEST(Coefficients, ComponentDependenceOfFlowCoefficients)
{
  const auto a = coefficient_table(engine(), 0.0, 1, 6);
  const auto b = coefficient_table(engine(), 0.0, 4, 6);
  for (int j = 0; j <= 6; ++j) {
    EXPECT_NEAR(b[j].beta / a[j].beta, 12.0 / 9.0, 1e-14);
    EXPECT_NEAR(b[j].theta / a[j].theta, 6.0 / 3.0, 1e-14);
    EXPECT_NEAR(b[j].eta_p / a[j].eta_p, 2.0, 1e-14);
    EXPECT_NEAR(b[j].pi_p / a[j].pi_p, 2.0, 1e-14);
    EXPECT_NEAR(b[j].kappa_g / a[j].kappa_g, 4.0 * 6.0 / 3.0, 1e-13);
  }
  EXPECT_DOUBLE_EQ(gamma_exponent<double>(1), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(gamma_exponent<double>(4), 0.5);
}

TEST(Coefficients, EngineAgreesWithTorusKernels)
{
  const double m2 = 0.01;
  const auto t = coefficient_table(engine(), m2, 1, 2);
  const ScaleDecomposition d = decompose(m2, 2, 3, 32, false);
  for (int j = 0; j <= 1; ++j) {
    const CoefficientSet c = coefficient_set(pt_inputs(scale_kernels(d, j, 32)), 1, 2, j, m2);
    const double tol = j == 0 ? 1e-6 : 1e-4;
    EXPECT_LT(rel(c.beta, t[j].beta), tol) << "j = " << j;
    EXPECT_LT(rel(c.theta, t[j].theta), tol) << "j = " << j;
    EXPECT_LT(rel(c.eta_p, t[j].eta_p), tol) << "j = " << j;
    EXPECT_LT(rel(c.pi_p, t[j].pi_p), tol) << "j = " << j;
    EXPECT_LT(rel(c.kappa_gg, t[j].kappa_gg), 10 * tol) << "j = " << j;
  }
}

TEST(Coefficients, QuarticCombinationTwoWays)
{
  const ScaleDecomposition d = decompose(0.05, 2, 2, 16, false);
  const ScaleKernels k = scale_kernels(d, 0, 16);
  EXPECT_LT(rel(quartic_expanded(k.w, k.c), pt_inputs(k).E), 1e-9);
}

TEST(Coefficients, BetaSumsToBubbleMultiple)
{
  for (double m2 : {1e-2, 1e-3}) {
    const auto t = coefficient_table(engine(), m2, 2, 40);
    double sum = 0.0;
    for (const CoefficientSet& c : t) sum += c.beta;
    EXPECT_LT(rel(sum, 10.0 * bubble_infinite(m2)), 1e-6) << "m2 = " << m2;
  }
}

TEST(Coefficients, BetaDecaysBeyondMassScale)
{
  const auto t = coefficient_table(engine(), 1.0 / 256.0, 1, 12);
  EXPECT_LT(t[10].beta, 1e-2 * t[3].beta);
  EXPECT_GT(t[3].beta, 0.0);
}

TEST(Coefficients, QuarticBoundScalesUniformly)
{
  const auto q = kappa_gg_bound_check(engine(), 0.0, 20);
  EXPECT_NEAR(q[20].scaled / q[10].scaled, 1.0, 0.05);
  // the alternative sign grows with the scale
  EXPECT_GT(q[20].scaled_printed / q[10].scaled_printed, 1.5);
}

TEST(Coefficients, RescaledCoefficients)
{
  const auto t = coefficient_table(engine(), 0.0, 1, 5);
  const CoefficientSet& c = t[3];
  const RescaledCoefficients r = rescaled(c);
  EXPECT_DOUBLE_EQ(r.eta, std::pow(2.0, 8) * c.eta_p);
  EXPECT_DOUBLE_EQ(r.w1bar, std::pow(2.0, -6) * c.in.w1);
  EXPECT_DOUBLE_EQ(r.wssbar, std::pow(2.0, -12) * c.in.wss);
  EXPECT_DOUBLE_EQ(r.kappa_zmu, std::pow(2.0, -6) * c.kappa_znu_p + 2.0 * c.kappa_z * r.w1bar);
}

TEST(Coefficients, PrintedVariantsDifferOnlyWhereStated)
{
  const auto base = coefficient_table(engine(), 0.0, 2, 3);
  FormulaOptions opt;
  opt.printed_pt = true;
  const auto printed = coefficient_table(engine(), 0.0, 2, 3, opt);
  EXPECT_EQ(printed[2].beta, base[2].beta);
  EXPECT_EQ(printed[2].theta, base[2].theta);
  EXPECT_EQ(printed[2].kappa_gnu_p, 0.0);
  EXPECT_EQ(printed[2].kappa_gz, 0.0);
  EXPECT_EQ(printed[2].pt_sign, -1.0);
  EXPECT_NE(base[2].kappa_gnu_p, 0.0);
}

TEST(Coefficients, RejectsNegativeComponents)
{
  EXPECT_THROW(coefficient_table(engine(), 0.0, -1, 3), std::invalid_argument);
}
