// Acceptance suite: one line per criterion, exit status 0 iff all selected pass.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "phi4/coefficients.hpp"
#include "phi4/flow.hpp"
#include "phi4/lattice.hpp"
#include "phi4/observables.hpp"
#include "phi4/oracle/loc.hpp"
#include "phi4/oracle/upt.hpp"

namespace {

using namespace phi4;
namespace orc = phi4::oracle;

constexpr double kPi2x16 = 16.0 * std::numbers::pi * std::numbers::pi;

// Tolerances and windows.
constexpr double kBubbleTol = 0.10;
constexpr int kBubbleResolution = 64;
constexpr double kBetaLimitTol = 0.02;
constexpr double kTelescopeTol = 1e-6;
constexpr double kTelescopeMass = 1e-4;
constexpr double kChiExponentTol = 0.05;
constexpr double kChiG = 0.02;
constexpr double kChiEpsHi = 1e-3, kChiEpsLo = 1e-8;
constexpr double kCriticalTol = 0.15;
constexpr double kHeatExponentTol = 0.07;
constexpr double kHeatEpsHi = 1e-3, kHeatEpsLo = 1e-9;
constexpr double kHeatPlateauDrift = 0.15;
constexpr double kHeatLimitTol = 0.30;
constexpr double kGInfinityTol = 0.10;
constexpr double kGInfinityG0 = 0.05;
constexpr double kOracleTol = 1e-10;
constexpr int kOracleDraws = 20;
constexpr double kFreeTol = 1e-8;
constexpr double kWhiteNoiseTol = 0.01;
constexpr double kGffTol = 0.02;
constexpr double kSelfConsistencyFactor = 2.0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a)
{
  char b[64];
  std::snprintf(b, sizeof b, f, a);
  return b;
}

const FlowModel& model(int n)
{
  static std::map<int, std::unique_ptr<FlowModel>> models;
  auto& m = models[n];
  if (!m) {
    FlowConfig cfg;
    cfg.n = n;
    m = std::make_unique<FlowModel>(cfg);
  }
  return *m;
}

Outcome bubble_log_law()
{
  Outcome o{true, ""};
  double previous = std::numeric_limits<double>::infinity();
  for (double m2 : {1e-2, 1e-3, 1e-4}) {
    const double sum = bubble(m2, kBubbleResolution).value;
    const double exact = bubble_infinite(m2);
    const double ratio = exact * kPi2x16 / std::log(1.0 / m2);
    const double gap = std::abs(ratio - 1.0);
    o.pass = o.pass && gap <= kBubbleTol && gap < previous;
    previous = gap;
    o.detail += "m2=" + sci(m2) + " ratio " + fmt("%.4f", ratio) + " (M=64 sum " + fmt("%.4f", sum * kPi2x16 / std::log(1.0 / m2)) + "); ";
  }
  return o;
}

Outcome beta_limit()
{
  Outcome o{true, ""};
  for (int n : {0, 1, 2, 4}) {
    const FlowTable t = model(n).table(0.0);
    const double ref = (8.0 + n) * std::log(2.0) / kPi2x16;
    double worst = 0.0;
    for (int j = 8; j <= 12; ++j) worst = std::max(worst, std::abs(t.c[j].beta / ref - 1.0));
    o.pass = o.pass && worst <= kBetaLimitTol;
    o.detail += "n=" + std::to_string(n) + " beta_10/ref " + fmt("%.5f", t.c[10].beta / ref) + "; ";
  }
  return o;
}

Outcome telescoping()
{
  Outcome o{true, ""};
  const double B = bubble_infinite(kTelescopeMass);
  for (int n : {0, 1, 4}) {
    const FlowTable t = model(n).table(kTelescopeMass);
    double sum = 0.0;
    for (const auto& c : t.c) sum += c.beta;
    const double rel = std::abs(sum / ((8.0 + n) * B) - 1.0);
    o.pass = o.pass && rel <= kTelescopeTol;
    o.detail += "n=" + std::to_string(n) + " rel " + sci(rel) + "; ";
  }
  return o;
}

Outcome susceptibility_exponent()
{
  Outcome o{true, ""};
  for (int n : {1, 2, 4}) {
    const EpsilonMap map(model(n), kChiG);
    const SusceptibilityCurve c = susceptibility_curve(map, log_grid(kChiEpsHi, kChiEpsLo, 4));
    const double target = gamma_exponent<double>(n);
    o.pass = o.pass && std::abs(c.fit.slope - target) <= kChiExponentTol;
    o.detail += "n=" + std::to_string(n) + " slope " + fmt("%.4f", c.fit.slope) + " vs " + fmt("%.4f", target) + "; ";
  }
  return o;
}

Outcome critical_slope()
{
  Outcome o{true, ""};
  for (double g : {0.02, 0.01, 0.005}) {
    const CriticalPoint c = critical_nu(model(1), g);
    o.pass = o.pass && c.nu_c < 0.0 && std::abs(c.ratio - 1.0) <= kCriticalTol;
    o.detail += "g=" + fmt("%g", g) + " nu_c/(-a g) " + fmt("%.4f", c.ratio) + "; ";
  }
  return o;
}

Outcome specific_heat_cases()
{
  Outcome o{true, ""};
  const double g = kChiG;
  {
    const EpsilonMap map(model(1), g);
    std::vector<double> x, y;
    for (double e : log_grid(kHeatEpsHi, kHeatEpsLo, 4)) {
      const SpecificHeat h = specific_heat(map, e);
      x.push_back(h.loglog);
      y.push_back(std::log(h.c_H));
    }
    const double slope = linear_fit(x, y).slope;
    const bool ok = std::abs(slope - 1.0 / 3.0) <= kHeatExponentTol;
    o.pass = o.pass && ok;
    o.detail += "n=1 slope " + fmt("%.4f", slope) + " vs 0.3333; ";
  }
  {
    const EpsilonMap map(model(4), g);
    std::vector<double> r;
    for (double e : log_grid(kHeatEpsLo * 100.0, kHeatEpsLo, 4)) {
      const SpecificHeat h = specific_heat(map, e);
      r.push_back(h.c_H / h.loglog);
    }
    const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
    double mean = 0.0;
    for (double v : r) mean += v / r.size();
    const double drift = (*hi - *lo) / mean;
    o.pass = o.pass && drift < kHeatPlateauDrift;
    o.detail += "n=4 drift " + fmt("%.4f", drift) + " D " + fmt("%.3f", mean) + " vs (1/6)/g " +
                fmt("%.3f", specific_heat_reference(4, g)) + "; ";
  }
  {
    const EpsilonMap map(model(6), g);
    double highest = 0.0;
    for (double e : log_grid(kHeatEpsHi, kHeatEpsLo, 4)) highest = std::max(highest, specific_heat(map, e).c_H);
    const double limit = specific_heat(map, 0.0).c_H;
    const double ref = specific_heat_reference(6, g);
    const bool ok = std::isfinite(limit) && highest <= limit * (1.0 + 1e-9) && std::abs(limit / ref - 1.0) <= kHeatLimitTol;
    o.pass = o.pass && ok;
    o.detail += "n=6 limit " + fmt("%.3f", limit) + " vs " + fmt("%.3f", ref) + " max on grid " + fmt("%.3f", highest);
  }
  return o;
}

Outcome g_infinity()
{
  Outcome o{true, ""};
  const int n = 1;
  for (double m2 : {1e-6, 1e-8}) {
    const FlowTable t = model(n).table(m2);
    const Trajectory tr = critical_trajectory(t, kGInfinityG0);
    const double B = (n + 8) * bubble_infinite(m2);
    const double product = tr.g.back() * B;
    o.pass = o.pass && std::abs(product - 1.0) <= kGInfinityTol;
    o.detail += "m2=" + sci(m2) + " g_inf B " + fmt("%.4f", product) + " (B/(1/g0 + B) " +
                fmt("%.4f", B / (1.0 / kGInfinityG0 + B)) + "); ";
  }
  return o;
}

Outcome oracle_equivalence()
{
  Outcome o{true, ""};
  std::mt19937_64 rng(7);
  double worst = 0.0, worst_printed = 0.0;
  for (int d = 0; d < kOracleDraws; ++d) {
    const int range = 1 + d % 2;
    const int side = orc::minimal_oracle_side(range);
    const auto w = orc::random_isotropic_kernel<double>(side, range, rng);
    const auto c = orc::random_isotropic_kernel<double>(side, range, rng);
    const auto V = orc::random_couplings<double>(rng);
    for (int n : {1, 2, 3}) {
      const orc::SmallTorus T(side, n);
      worst = std::max(worst, orc::compare_u_pt(T, V, w, c).max_error());
      FormulaOptions printed;
      printed.printed_pt = true;
      worst_printed = std::max(worst_printed, orc::compare_u_pt(T, V, w, c, printed).max_error());
    }
  }
  o.pass = worst < kOracleTol;
  o.detail = "max |oracle - formula| " + sci(worst) + " on sides 2r+5 (printed-sign variant " + sci(worst_printed) + ")";

  // exact rational pass, range 1
  std::mt19937_64 rq(11);
  bool exact = true;
  for (int d = 0; d < 3; ++d) {
    const int side = orc::minimal_oracle_side(1);
    const auto w = orc::random_isotropic_kernel<orc::Rational>(side, 1, rq);
    const auto c = orc::random_isotropic_kernel<orc::Rational>(side, 1, rq);
    const auto V = orc::random_couplings<orc::Rational>(rq);
    for (int n : {1, 2, 3}) {
      const orc::SmallTorus T(side, n);
      const auto a = orc::u_pt_oracle(T, V, w, c);
      const auto f = orc::u_pt_formula(n, V, w, c);
      exact = exact && a.g == f.g && a.nu == f.nu && a.z + a.y == f.z + f.y && a.u == f.u;
    }
  }
  o.pass = o.pass && exact;
  o.detail += std::string("; rational ") + (exact ? "exact" : "MISMATCH");

  // the 5^4 torus with range-1 kernels wraps around
  std::mt19937_64 r5(5);
  const auto w5 = orc::random_isotropic_kernel<double>(5, 1, r5);
  const auto c5 = orc::random_isotropic_kernel<double>(5, 1, r5);
  const auto V5 = orc::random_couplings<double>(r5);
  o.detail += "; side 5 range 1: " + sci(orc::compare_u_pt(orc::SmallTorus(5, 1), V5, w5, c5, {}, true).max_error());
  return o;
}

Outcome loc_identities()
{
  using R = orc::Rational;
  const orc::SmallTorus T(7, 2);
  bool ok = true;
  std::string detail;
  // Loc_X |phi|^4 on a two-site block and Loc |phi|^6
  const int x0 = 0, x1 = T.site({1, 0, 0, 0});
  const std::vector<int> X{x0, x1};
  const auto tau2 = orc::tau_squared<R>(T, x1);
  const auto l4 = orc::loc(T, tau2, X);
  ok = ok && l4.g == R(1) / R(2) && l4.nu == 0 && l4.z == 0 && l4.y == 0 && l4.u == 0;
  const auto tau3 = orc::tau<R>(T, x0) * orc::tau_squared<R>(T, x0);
  const auto l6 = orc::loc(T, tau3);
  ok = ok && l6.g == 0 && l6.nu == 0 && l6.z == 0 && l6.y == 0 && l6.u == 0;
  detail += std::string("block/sextic ") + (ok ? "exact" : "FAIL");

  // Loc_0 sum_y q_{-y} tau_y = q1 tau + q** (tau_gradgrad - tau_delta)
  std::mt19937_64 rng(3);
  const auto q = orc::random_isotropic_kernel<R>(7, 2, rng);
  orc::Polynomial<R> F;
  R q1 = 0, qss = 0;
  for (int s = 0; s < T.sites(); ++s) {
    const Point y = T.coords(s);
    const R v = q.values[T.difference(0, s)];
    F += orc::tau<R>(T, s) * v;
    q1 += q.values[s];
    qss += q.values[s] * R(y[0] * y[0]);
  }
  const auto lq = orc::loc(T, F);
  const bool golden = lq.nu == q1 && lq.y == qss && lq.z == -qss && lq.g == 0 && lq.u == 0;
  ok = ok && golden;
  detail += std::string("; quadratic ") + (golden ? "exact" : "FAIL");

  // (1 - Loc) pairs to zero, Loc idempotent
  const auto V = orc::random_couplings<R>(rng);
  const auto w = orc::random_isotropic_kernel<R>(7, 1, rng);
  const auto G = orc::cross_operator(T, w, orc::local_polynomial(T, 0, V), orc::local_polynomial(T, T.site({1, 1, 0, 0}), V));
  const auto once = orc::loc(T, G);
  const auto residual = G - orc::loc_polynomial(T, once);
  const auto p = orc::pairings(T, residual);
  bool zero = true;
  for (const R& v : p) zero = zero && v == 0;
  const auto twice = orc::loc(T, orc::loc_polynomial(T, once));
  const bool idem = twice.g == once.g && twice.nu == once.nu && twice.z == once.z && twice.y == once.y && twice.u == once.u;
  ok = ok && zero && idem;
  detail += std::string("; (1-Loc) pairing ") + (zero ? "zero" : "NONZERO") + "; idempotent " + (idem ? "yes" : "NO");
  return {ok, detail};
}

Outcome free_theory()
{
  Outcome o{true, ""};
  for (int n : {1, 4}) {
    const EpsilonMap map(model(n), 0.0);
    for (double eps : {1e-2, 1e-3}) {
      const Susceptibility s = susceptibility(map, eps);
      const Pressure p = pressure(map, eps);
      const double chi_err = std::abs(s.chi * eps - 1.0);
      const double p_err = std::abs(p.p / free_pressure_infinite(n, eps) - 1.0);
      const double d2 = free_pressure_second_difference(n, eps, 1e-5 * eps);
      const double d2_err = std::abs(d2 / (n * bubble_infinite(eps)) - 1.0);
      o.pass = o.pass && chi_err <= kFreeTol && p_err <= kFreeTol && d2_err <= kFreeTol && p.q == 0.0;
      o.detail += "n=" + std::to_string(n) + " eps=" + sci(eps) + " chi " + sci(chi_err) + " p " + sci(p_err) +
                  " d2p " + sci(d2_err) + "; ";
    }
  }
  return o;
}

Outcome scaling_limit()
{
  Outcome o{true, ""};
  const int n = 1;
  const double g = kChiG;
  const std::vector<FourierMode> h{{{1, 0, 0, 0}, {1.0, 0.0}}};
  const EpsilonMap map(model(n), g, 4.0);
  for (int N : {6, 7, 8, 9}) {
    const PairingResult r = scaling_limit_pairing(map, h, N, 1.0);
    o.pass = o.pass && std::abs(r.value / r.white_noise - 1.0) <= kWhiteNoiseTol;
    o.detail += "white N=" + std::to_string(N) + " " + fmt("%.5f", r.value) + "; ";
  }
  const SusceptibilityCurve c = susceptibility_curve(map, log_grid(1e-5, 1e-9, 2));
  const MassAsymptote a = mass_epsilon_asymptote(model(n), c);
  const double gam = gamma_exponent<double>(n);
  const double alpha = std::pow(2.0, gam) / a.c_g;
  const double target = continuum_gff_pairing(h, 1.0);
  for (int N : {8, 10, 12}) {
    const double eps = gff_schedule(alpha, 1.0, 2, N, gam);
    const PairingResult r = scaling_limit_pairing(map, h, N, eps);
    o.pass = o.pass && std::abs(r.value / target - 1.0) <= kGffTol;
    o.detail += "gff N=" + std::to_string(N) + " " + fmt("%.5f", r.value / target) + "; ";
  }
  return o;
}

Outcome self_consistency_check()
{
  Outcome o{true, ""};
  double worst = 1.0;
  for (int n : {1, 4}) {
    for (double m2 : {0.0, 1e-4}) {
      const FlowTable t = model(n).table(m2);
      for (int j : {0, 3, 10}) {
        std::vector<double> bar, du;
        for (double s : {1e-1, 1e-2, 1e-3}) {
          const SelfConsistency sc = self_consistency(t.c[j], t.r[j], BarCouplings{s, 0.3 * s, -0.5 * s});
          bar.push_back(sc.bar_defect);
          du.push_back(sc.du_defect);
        }
        for (const auto* v : {&bar, &du}) {
          const auto [lo, hi] = std::minmax_element(v->begin(), v->end());
          if (*hi <= 1e-6) continue;  // vanishes to roundoff at this order
          const double factor = *hi / std::max(*lo, 1e-300);
          worst = std::max(worst, factor);
        }
      }
    }
  }
  o.pass = worst < kSelfConsistencyFactor;
  o.detail = "max variation of defect/|V|^3 over three magnitudes " + fmt("%.3f", worst);
  return o;
}

struct Entry {
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"acceptance criteria"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-12)")->check(CLI::Range(0, 12));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Entry> all{{"bubble log law", bubble_log_law},
                               {"beta limit", beta_limit},
                               {"beta telescoping", telescoping},
                               {"susceptibility exponent", susceptibility_exponent},
                               {"critical point slope", critical_slope},
                               {"specific heat", specific_heat_cases},
                               {"g_inf bubble product", g_infinity},
                               {"oracle equivalence", oracle_equivalence},
                               {"Loc identities", loc_identities},
                               {"free theory", free_theory},
                               {"scaling limit pairing", scaling_limit},
                               {"flow self-consistency", self_consistency_check}};
  bool all_pass = true;
  for (std::size_t k = 0; k < all.size(); ++k) {
    if (only != 0 && only != static_cast<int>(k + 1)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = all[k].run();
    } catch (const std::exception& e) {
      r = {false, std::string("error: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %zu %s (%.1fs): %s\n", r.pass ? "PASS" : "FAIL", k + 1, all[k].name, dt,
                r.detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && r.pass;
  }
  return all_pass ? 0 : 1;
}
