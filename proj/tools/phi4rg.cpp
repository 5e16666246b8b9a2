// phi4rg: experiment drivers writing CSV/JSON artifacts.
// Exit codes: 0 success, 2 usage error, 3 tolerance violated, 4 runtime failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "phi4/coefficients.hpp"
#include "phi4/decomposition.hpp"
#include "phi4/flow.hpp"
#include "phi4/io.hpp"
#include "phi4/lattice.hpp"
#include "phi4/observables.hpp"
#include "phi4/oracle/upt.hpp"

namespace {

using namespace phi4;
using io::CsvTable;
using io::RunConfig;
using json = nlohmann::ordered_json;

constexpr int kExitUsage = 2;
constexpr int kExitTolerance = 3;
constexpr int kExitRuntime = 4;

struct Run {
  const RunConfig& cfg;
  std::string sub;
  io::ArtifactSet out;
  bool within_tolerance = true;

  void csv(const CsvTable& t, const std::string& suffix = "")
  {
    out.add(io::artifact_name(sub, cfg, "csv", suffix), t.render(cfg, sub));
  }
  void report(json body) { out.add(io::artifact_name(sub, cfg, "json"), io::render_json(cfg, sub, std::move(body))); }
  void check(bool ok, json& body, const std::string& what)
  {
    body["checks"][what] = ok;
    within_tolerance = within_tolerance && ok;
  }
};

FormulaOptions formulas(const RunConfig& c)
{
  FormulaOptions f;
  f.printed_pt = c.printed_pt;
  f.printed_quartic_sign = c.printed_quartic_sign;
  f.printed_mixed_signs = c.printed_mixed_signs;
  return f;
}

FlowModel make_model(const RunConfig& c)
{
  FlowConfig f;
  f.n = c.n;
  f.J_cap = c.J_cap;
  f.omega = c.omega;
  f.formulas = formulas(c);
  f.engine.L = c.L;
  f.plateau_steps = c.plateau_steps;
  return FlowModel(f);
}

std::vector<double> eps_grid(const RunConfig& c) { return log_grid(c.eps_hi, c.eps_lo, c.eps_per_decade); }

void run_green(Run& r)
{
  const RunConfig& c = r.cfg;
  CsvTable bub({"m2", "B_quadrature", "B_coarse", "relative_gap", "B_infinite", "law_ratio"});
  CsvTable grn({"m2", "x1", "G_torus", "G_infinite"});
  json body;
  for (double m2 : c.m2) {
    const QuadratureResult q = bubble(m2, c.resolution);
    const double B = bubble_infinite(m2);
    bub.add_row({m2, q.value, q.coarse, q.relative_gap, B, B * 16.0 * M_PI * M_PI / std::log(1.0 / m2)});
    for (int x = 0; x <= 4; ++x) {
      const Point p{x, 0, 0, 0};
      grn.add_row({m2, static_cast<double>(x), green_function(m2, p, c.resolution), green_infinite(m2, p)});
    }
  }
  body["delta_inv_origin"] = delta_inv_origin();
  r.csv(bub, "_bubble");
  r.csv(grn, "_green");
  r.report(body);
}

void run_decompose(Run& r)
{
  const RunConfig& c = r.cfg;
  CsvTable t({"m2", "j", "side", "truncated", "C_j_origin", "sup", "sup_scaled", "sup_d1_scaled", "sup_d2_scaled",
              "chi_j"});
  for (double m2 : c.m2) {
    const ScaleDecomposition d = decompose(m2, c.L, c.J_max, c.M_cap);
    const MassScale jm = mass_scale(m2, c.L);
    for (int j = 1; j <= c.J_max; ++j) {
      const ScalingReport s0 = scaling_diagnostic(d, j, {0, 0, 0, 0});
      const ScalingReport s1 = scaling_diagnostic(d, j, {1, 0, 0, 0});
      const ScalingReport s2 = scaling_diagnostic(d, j, {2, 0, 0, 0});
      t.add_row({m2, static_cast<double>(j), static_cast<double>(d.sides[j - 1]), d.truncated[j - 1] ? 1.0 : 0.0,
                 d.kernel_value(j, {0, 0, 0, 0}), s0.sup, s0.scaled, s1.scaled, s2.scaled, chi(j, jm, c.omega)});
    }
  }
  r.csv(t);
  r.report(json::object());
}

void run_coeffs(Run& r)
{
  const RunConfig& c = r.cfg;
  const FlowModel model = make_model(c);
  CsvTable t({"m2", "j", "beta", "theta", "xi_p", "pi_p", "sigma", "zeta", "eta_p", "kappa_g", "kappa_nu_p", "kappa_z",
              "kappa_znu_p", "kappa_gg", "kappa_nunu_p", "kappa_zz", "kappa_gnu_p", "kappa_gz", "w1", "wss"});
  json body;
  for (double m2 : c.m2) {
    const FlowTable ft = model.table(m2);
    double sum = 0.0;
    for (const CoefficientSet& s : ft.c) {
      sum += s.beta;
      t.add_row({m2, static_cast<double>(s.j), s.beta, s.theta, s.xi_p, s.pi_p, s.sigma, s.zeta, s.eta_p, s.kappa_g,
                 s.kappa_nu_p, s.kappa_z, s.kappa_znu_p, s.kappa_gg, s.kappa_nunu_p, s.kappa_zz, s.kappa_gnu_p,
                 s.kappa_gz, s.in.w1, s.in.wss});
    }
    body["beta_sum"].push_back({{"m2", m2}, {"sum", sum}, {"bubble_multiple", (8.0 + c.n) * bubble_infinite(m2)}});
  }
  r.csv(t);
  r.report(body);
}

void run_flow(Run& r)
{
  const RunConfig& c = r.cfg;
  const FlowModel model = make_model(c);
  CsvTable t({"g0", "m2", "j", "g", "z", "mu", "du", "u", "mu_p", "chi"});
  json body;
  std::vector<double> masses{0.0};
  masses.insert(masses.end(), c.m2.begin(), c.m2.end());
  for (double g0 : c.g) {
    for (double m2 : masses) {
      const FlowTable ft = model.table(m2);
      const Trajectory tr = critical_trajectory(ft, g0, c.plateau_steps);
      for (int j = 0; j <= tr.J; ++j)
        t.add_row({g0, m2, static_cast<double>(j), tr.g[j], tr.z[j], tr.mu[j], j < tr.J ? tr.du[j] : 0.0,
                   j < tr.J ? tr.u[j] : tr.u_inf, tr.mu_p[j], tr.chi[j]});
      const double id = inverse_g_identity_residual(ft, tr);
      body["trajectories"].push_back({{"g0", g0},
                                      {"m2", m2},
                                      {"nu0c", tr.nu0c},
                                      {"z0c", tr.z0c},
                                      {"u_inf", tr.u_inf},
                                      {"forward_residual", forward_residual(ft, tr)},
                                      {"inverse_g_identity", id}});
      r.check(id <= c.tol_identity, body, "inverse_g_identity g0=" + io::short_double(g0) + " m2=" + io::short_double(m2));
    }
  }
  r.csv(t);
  r.report(body);
}

void run_critical(Run& r)
{
  const RunConfig& c = r.cfg;
  const FlowModel model = make_model(c);
  CsvTable t({"g", "nu_c", "nu_c_extrapolated", "error", "a", "ratio"});
  for (double g : c.g) {
    const CriticalPoint p = critical_nu(model, g);
    t.add_row({g, p.nu_c, p.nu_c_extrapolated, p.error, p.a, p.ratio});
  }
  r.csv(t);
  r.report(json::object());
}

void run_chi(Run& r)
{
  const RunConfig& c = r.cfg;
  const FlowModel model = make_model(c);
  CsvTable t({"g", "eps", "chi", "chi_eps", "loglog"});
  json body;
  for (double g : c.g) {
    const EpsilonMap map(model, g);
    const SusceptibilityCurve s = susceptibility_curve(map, eps_grid(c));
    for (const Susceptibility& p : s.points)
      t.add_row({g, p.eps, p.chi, p.chi * p.eps, std::log(std::log(1.0 / p.eps))});
    body["fits"].push_back({{"g", g},
                            {"nu_c", s.nu_c},
                            {"slope", s.fit.slope},
                            {"slope_error", s.fit.slope_error},
                            {"gamma", s.gamma},
                            {"amplitude", s.amplitude},
                            {"amplitude_reference", s.amplitude_reference}});
    if (g > 0.0) r.check(std::abs(s.fit.slope - s.gamma) <= c.tol_exponent, body, "exponent g=" + io::short_double(g));
  }
  r.csv(t);
  r.report(body);
}

void run_heat(Run& r)
{
  const RunConfig& c = r.cfg;
  const FlowModel model = make_model(c);
  CsvTable t({"g", "eps", "c_H", "closed_form", "loglog"});
  json body;
  for (double g : c.g) {
    const EpsilonMap map(model, g);
    std::vector<double> x, y, ratio;
    for (double e : eps_grid(c)) {
      const SpecificHeat h = specific_heat(map, e);
      t.add_row({g, e, h.c_H, h.closed_form, h.loglog});
      x.push_back(h.loglog);
      y.push_back(std::log(h.c_H));
      ratio.push_back(h.c_H / h.loglog);
    }
    const SpecificHeat at0 = specific_heat(map, 0.0);
    json f{{"g", g}, {"c_H_at_critical", at0.c_H}, {"reference", specific_heat_reference(c.n, g)}};
    if (c.n < 4 && g > 0.0) {
      const double slope = linear_fit(x, y).slope;
      const double target = (4.0 - c.n) / (c.n + 8.0);
      f["slope"] = slope;
      f["target"] = target;
      r.check(std::abs(slope - target) <= c.tol_exponent, body, "exponent g=" + io::short_double(g));
    } else if (c.n == 4) {
      const auto [lo, hi] = std::minmax_element(ratio.begin(), ratio.end());
      f["plateau_drift"] = (*hi - *lo) / *hi;
    }
    body["fits"].push_back(f);
  }
  r.csv(t);
  r.report(body);
}

void run_pressure(Run& r)
{
  const RunConfig& c = r.cfg;
  const FlowModel model = make_model(c);
  CsvTable t({"g", "eps", "p", "free", "q", "dp_dnu", "reference"});
  for (double g : c.g) {
    const EpsilonMap map(model, g);
    for (double e : eps_grid(c)) {
      const Pressure p = pressure(map, e);
      t.add_row({g, e, p.p, p.free, p.q, p.dp_dnu, p.reference});
    }
  }
  r.csv(t);
  r.report(json::object());
}

void run_limit(Run& r)
{
  const RunConfig& c = r.cfg;
  const FlowModel model = make_model(c);
  const std::vector<FourierMode> h{{{1, 0, 0, 0}, {1.0, 0.0}}};
  CsvTable t({"g", "schedule", "N", "eps", "scaled_mass", "value", "white_noise", "gff", "regime"});
  const double gam = gamma_exponent<double>(c.n);
  for (double g : c.g) {
    const EpsilonMap map(model, g, 4.0);
    auto row = [&](const char* schedule, int N, double eps) {
      const PairingResult p = scaling_limit_pairing(map, h, N, eps);
      t.add_row({io::short_double(g), schedule, std::to_string(N), io::format_double(p.eps),
                 io::format_double(p.scaled_mass), io::format_double(p.value), io::format_double(p.white_noise),
                 io::format_double(continuum_gff_pairing(h, c.gff_mass2)), p.regime});
    };
    for (int N : c.N) row("fixed", N, c.limit_eps);
    for (int N : c.N) row("gff", N, gff_schedule(c.gff_alpha, c.gff_mass2, c.L, N, gam));
  }
  r.csv(t);
  r.report(json::object());
}

void run_verify(Run& r)
{
  namespace orc = phi4::oracle;
  const RunConfig& c = r.cfg;
  const FormulaOptions opt = formulas(c);
  CsvTable t({"draw", "n", "side", "range", "err_g", "err_nu", "err_zy", "err_u"});
  std::mt19937_64 rng(c.seed);
  double worst = 0.0;
  const int side = orc::minimal_oracle_side(c.oracle_range);
  for (int d = 0; d < c.draws; ++d) {
    const auto w = orc::random_isotropic_kernel<double>(side, c.oracle_range, rng);
    const auto k = orc::random_isotropic_kernel<double>(side, c.oracle_range, rng);
    const auto V = orc::random_couplings<double>(rng);
    for (int n : {1, 2, 3}) {
      const orc::OracleComparison cmp = orc::compare_u_pt(orc::SmallTorus(side, n), V, w, k, opt);
      worst = std::max(worst, cmp.max_error());
      t.add_row({static_cast<double>(d), static_cast<double>(n), static_cast<double>(side),
                 static_cast<double>(c.oracle_range), cmp.err_g, cmp.err_nu, cmp.err_zy, cmp.err_u});
    }
  }
  json body{{"side", side}, {"max_error", worst}, {"tolerance", c.tol_oracle}};
  r.check(worst <= c.tol_oracle, body, "oracle_vs_formula");
  if (c.rational) {
    std::mt19937_64 rq(c.seed + 1);
    const int s1 = orc::minimal_oracle_side(1);
    bool exact = true;
    const auto w = orc::random_isotropic_kernel<orc::Rational>(s1, 1, rq);
    const auto k = orc::random_isotropic_kernel<orc::Rational>(s1, 1, rq);
    const auto V = orc::random_couplings<orc::Rational>(rq);
    for (int n : {1, 2, 3}) {
      const orc::SmallTorus T(s1, n);
      const auto a = orc::u_pt_oracle(T, V, w, k);
      const auto f = orc::u_pt_formula(n, V, w, k, opt);
      exact = exact && a.g == f.g && a.nu == f.nu && a.z + a.y == f.z + f.y && a.u == f.u;
    }
    r.check(exact, body, "rational_exact");
  }
  r.csv(t);
  r.report(body);
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"phi4rg: renormalisation group flow experiments for the 4D n-component |phi|^4 model"};
  app.require_subcommand(1, 1);
  const std::map<std::string, std::pair<std::string, std::function<void(Run&)>>> subs{
      {"green", {"lattice Green function and bubble diagram", run_green}},
      {"decompose", {"finite-range covariance decomposition", run_decompose}},
      {"coeffs", {"perturbative flow coefficients per scale", run_coeffs}},
      {"flow", {"critical trajectories", run_flow}},
      {"critical", {"critical point nu_c(g)", run_critical}},
      {"chi", {"susceptibility and its logarithmic exponent", run_chi}},
      {"heat", {"specific heat", run_heat}},
      {"pressure", {"pressure and its nu-derivative", run_pressure}},
      {"limit", {"scaling-limit pairing", run_limit}},
      {"verify", {"oracle-vs-formula suite", run_verify}}};

  std::string config_path, out_dir;
  std::vector<std::string> overrides;
  for (const auto& [name, entry] : subs) {
    CLI::App* s = app.add_subcommand(name, entry.first);
    s->add_option("-c,--config", config_path, "keyed configuration file");
    s->add_option("-s,--set", overrides, "override key=value (repeatable)")->take_all();
    s->add_option("-o,--out", out_dir, "output directory");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  const std::string sub = app.get_subcommands().front()->get_name();

  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = io::load_config(config_path, cfg);
    for (const std::string& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw io::UsageError("override '" + kv + "': expected key=value");
      io::set_value(cfg, io::trim(kv.substr(0, eq)), kv.substr(eq + 1));
    }
    if (!out_dir.empty()) io::set_value(cfg, "out_dir", out_dir);
    io::validate(cfg);
  } catch (const io::UsageError& e) {
    std::fprintf(stderr, "phi4rg %s: usage error: %s\n", sub.c_str(), e.what());
    return kExitUsage;
  }

  Run run{cfg, sub, {}, true};
  try {
    subs.at(sub).second(run);
    for (const std::string& f : run.out.commit(cfg.out_dir)) std::printf("%s\n", f.c_str());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "phi4rg %s: %s\n", sub.c_str(), e.what());
    return kExitRuntime;
  }
  if (!run.within_tolerance) {
    std::fprintf(stderr, "phi4rg %s: tolerance violated (see report)\n", sub.c_str());
    return kExitTolerance;
  }
  return 0;
}
