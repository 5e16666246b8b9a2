#include <gtest/gtest.h>

#include <cmath>

#include "phi4/flow.hpp"

using namespace phi4;

namespace {

const FlowModel& model(int n)
{
  static std::map<int, std::unique_ptr<FlowModel>> m;
  auto& p = m[n];
  if (!p) {
    FlowConfig cfg;
    cfg.n = n;
    p = std::make_unique<FlowModel>(cfg);
  }
  return *p;
}

}  // namespace

TEST(Flow, TransformInverseRoundTrip)
{
  const BarCouplings v{0.03, -0.01, 0.2};
  for (double sign : {1.0, -1.0}) {
    const BarCouplings t = transform(v, 0.07, 0.4, sign);
    const BarCouplings back = inverse_transform(t, 0.07, 0.4, sign);
    EXPECT_NEAR(back.g, v.g, 1e-15);
    EXPECT_NEAR(back.z, v.z, 1e-15);
    EXPECT_NEAR(back.mu, v.mu, 1e-15);
  }
}

TEST(Flow, InverseTransformRefusesLargeMu)
{
  EXPECT_THROW(inverse_transform(BarCouplings{0.01, 0.0, 10.0}, 0.1, 0.1), std::domain_error);
}

TEST(Flow, PerturbativeMapFixesZero)
{
  const FlowTable t = model(2).table(1e-3);
  const CouplingVector r = u_pt(CouplingVector{}, t.c[3]);
  EXPECT_EQ(r.g, 0.0);
  EXPECT_EQ(r.nu, 0.0);
  EXPECT_EQ(r.z, 0.0);
  EXPECT_EQ(r.y, 0.0);
  EXPECT_EQ(r.u, 0.0);
}

TEST(Flow, QuarticCouplingRecursion)
{
  const FlowTable t = model(1).table(0.0);
  const CoefficientSet& c = t.c[5];
  const double g = 0.01;
  EXPECT_NEAR(u_pt(CouplingVector{g, 0.0, 0.0, 0.0, 0.0}, c).g, g - c.beta * g * g - 4.0 * g * c.eta_p * g * c.in.w1p,
              1e-17);
}

TEST(Flow, SelfConsistencyDefectIsThirdOrder)
{
  const FlowTable t = model(1).table(0.0);
  for (int j : {2, 6}) {
    const double a = self_consistency(t.c[j], t.r[j], BarCouplings{1e-2, 3e-3, -5e-3}).bar_defect;
    const double b = self_consistency(t.c[j], t.r[j], BarCouplings{1e-3, 3e-4, -5e-4}).bar_defect;
    EXPECT_GT(a, 0.0);
    EXPECT_LT(std::max(a, b) / std::min(a, b), 2.0) << "j = " << j;
  }
}

TEST(Flow, CriticalTrajectoryIsConsistent)
{
  const FlowTable t = model(1).table(1e-4);
  const Trajectory tr = critical_trajectory(t, 0.02);
  EXPECT_EQ(tr.mu[tr.J], 0.0);
  EXPECT_EQ(tr.z[tr.J], 0.0);
  EXPECT_LT(inverse_g_identity_residual(t, tr), 1e-13);
  EXPECT_LT(forward_residual(t, tr), 1e-8);
  for (int j = 0; j < tr.J; ++j) {
    EXPECT_LE(tr.g[j + 1], tr.g[j]);
    EXPECT_GT(tr.mu_p[j], 0.0);
  }
  EXPECT_LT(tr.nu0c, 0.0);
}

TEST(Flow, CriticalMassIsLinearInCouplingAtWeakCoupling)
{
  const FlowTable t = model(1).table(0.0);
  const double a = 3.0 * delta_inv_origin();
  for (double g0 : {0.005, 0.001}) {
    const Trajectory tr = critical_trajectory(t, g0);
    EXPECT_NEAR(tr.nu0c / (-a * g0), 1.0, 50.0 * g0) << "g0 = " << g0;
  }
}

TEST(Flow, FreeFlowIsTrivial)
{
  const FlowTable t = model(1).table(1e-3);
  const Trajectory tr = critical_trajectory(t, 0.0);
  EXPECT_EQ(tr.nu0c, 0.0);
  EXPECT_EQ(tr.z0c, 0.0);
  for (int j = 0; j <= tr.J; ++j) EXPECT_EQ(tr.g[j], 0.0);
}

TEST(Flow, TangentFlowMatchesFiniteDifference)
{
  const FlowTable t = model(1).table(1e-4);
  const Trajectory tr = critical_trajectory(t, 0.02);
  const double h = 1e-9;
  const auto up = forward_mu(t, tr, tr.mu[0] + h);
  const auto dn = forward_mu(t, tr, tr.mu[0] - h);
  for (int j : {1, 5, 10}) EXPECT_NEAR((up[j] - dn[j]) / (2.0 * h) / tr.mu_p[j], 1.0, 1e-6) << "j = " << j;
}

TEST(Flow, MasslessTrajectoryCarriesPlateau)
{
  const Trajectory tr = critical_trajectory(model(6).table(0.0), 0.02);
  EXPECT_TRUE(tr.plateau);
  EXPECT_TRUE(std::isfinite(tr.upp_tail));
  EXPECT_LT(tr.upp_tail, 0.0);
  const Trajectory t1 = critical_trajectory(model(1).table(0.0), 0.02);
  EXPECT_TRUE(std::isinf(t1.upp_tail));
}

TEST(Flow, RejectsInvalidArguments)
{
  const FlowTable t = model(1).table(1e-2);
  EXPECT_THROW(critical_trajectory(t, -0.1), std::invalid_argument);
  FlowConfig bad;
  bad.J_cap = 1000;
  EXPECT_THROW(FlowModel{bad}, std::invalid_argument);
  EXPECT_THROW(make_table({}), std::invalid_argument);
}
