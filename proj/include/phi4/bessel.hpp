#pragma once

// One-dimensional lattice heat kernel q_t(x) = e^{-2t} I_x(2t) and the
// combinations of scaled modified Bessel functions used by the moment engine.

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>

namespace phi4::hk {

inline void quiet_gsl()
{
  static const bool once = [] {
    gsl_set_error_handler_off();
    return true;
  }();
  (void)once;
}

// Coefficient a_k(nu) of the Hankel expansion e^{-z} I_nu(z) ~ (2 pi z)^{-1/2} sum (-1)^k a_k / z^k.
inline double hankel_coeff(int k, double nu)
{
  double a = 1.0;
  const double mu = 4.0 * nu * nu;
  for (int j = 1; j <= k; ++j)
    a *= (mu - (2.0 * j - 1) * (2.0 * j - 1)) / (8.0 * j);
  return a;
}

constexpr double kAsymptoticZ = 40.0;

// sum_d c[d] e^{-2u} I_d(2u) for d = 0..4, free of cancellation when sum_d c[d] = 0.
inline double comb(double u, const std::array<double, 5>& c)
{
  quiet_gsl();
  const double z = 2.0 * u;
  if (z < kAsymptoticZ) {
    double s = 0.0;
    for (int d = 0; d < 5; ++d)
      if (c[d] != 0.0) s += c[d] * gsl_sf_bessel_In_scaled(d, z);
    return s;
  }
  double s = 0.0, zk = 1.0;
  for (int k = 0; k < 60; ++k) {
    double ak = 0.0;
    for (int d = 0; d < 5; ++d)
      if (c[d] != 0.0) ak += c[d] * hankel_coeff(k, d);
    const double term = ((k & 1) ? -ak : ak) * zk;
    s += term;
    if (k > 4 && std::abs(term) < 1e-18 * std::abs(s)) break;
    zk /= z;
  }
  return s / std::sqrt(2.0 * std::numbers::pi * z);
}

inline double P(int d, double u)
{
  std::array<double, 5> c{};
  c[d] = 1.0;
  return comb(u, c);
}

// Derivatives in u: P_d' = P_{d-1} + P_{d+1} - 2 P_d with P_{-1} = P_1.
inline double dP0(double u) { return comb(u, {-2, 2, 0, 0, 0}); }
inline double ddP0(double u) { return comb(u, {6, -8, 2, 0, 0}); }
inline double dP1(double u) { return comb(u, {1, -2, 1, 0, 0}); }

// Crude log of e^{-z} I_n(z) (uniform asymptotics), used only to avoid underflow.
inline double log_scaled_bessel_estimate(double n, double z)
{
  const double r = std::sqrt(n * n + z * z);
  return -z + r - n * std::asinh(n / z) - 0.5 * std::log(2.0 * std::numbers::pi * r);
}

constexpr double kEdgeworthT = 5000.0;

// q_t(x) by the lattice Edgeworth expansion; all even cumulants equal 2t.
inline double edgeworth_q(double t, double x)
{
  const double s2 = 2.0 * t, h = x / std::sqrt(s2), h2 = h * h;
  const double he4 = h2 * h2 - 6 * h2 + 3;
  const double he6 = ((h2 - 15) * h2 + 45) * h2 - 15;
  const double he8 = (((h2 - 28) * h2 + 210) * h2 - 420) * h2 + 105;
  const double g = std::exp(-0.5 * h2) / std::sqrt(2.0 * std::numbers::pi * s2);
  return g * (1.0 + he4 / (48.0 * t) + he6 / (2880.0 * t * t) + he8 / (4608.0 * t * t));
}

// q_t(x) for x = 0..xmax.
inline std::vector<double> profile(double t, int xmax)
{
  quiet_gsl();
  std::vector<double> q(xmax + 1, 0.0);
  if (t == 0.0) {
    q[0] = 1.0;
    return q;
  }
  if (t >= kEdgeworthT) {
    for (int x = 0; x <= xmax; ++x) q[x] = edgeworth_q(t, x);
    return q;
  }
  const double z = 2.0 * t;
  int nmax = xmax;
  while (nmax > 0 && log_scaled_bessel_estimate(nmax, z) < -680.0) --nmax;
  if (gsl_sf_bessel_In_scaled_array(0, nmax, z, q.data()) != GSL_SUCCESS || q[0] == 0.0) {
    for (int x = 0; x <= nmax; ++x) q[x] = gsl_sf_bessel_In_scaled(x, z);
  }
  const double norm = gsl_sf_bessel_I0_scaled(z) / q[0];
  for (int x = 0; x <= nmax; ++x) q[x] *= norm;
  return q;
}

// Support half-width that captures q_t up to roundoff.
inline int support(double t) { return 10 + static_cast<int>(9.0 * std::sqrt(2.0 * t)); }

}  // namespace phi4::hk
