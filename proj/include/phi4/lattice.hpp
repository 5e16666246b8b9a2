#pragma once

// Free lattice theory on Z^4 and on the discrete 4-torus.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "bessel.hpp"
#include "quadrature.hpp"

namespace phi4 {

constexpr int kDim = 4;
using Point = std::array<int, kDim>;
using Momentum = std::array<double, kDim>;

struct KernelGrid {
  int side = 0;
  double m2 = 0.0;
  int scale = -1;
  std::vector<double> values;

  KernelGrid() = default;
  KernelGrid(int m, double mass2 = 0.0, int j = -1)
      : side(m), m2(mass2), scale(j), values(static_cast<std::size_t>(m) * m * m * m, 0.0)
  {
    if (m < 2) throw std::invalid_argument("KernelGrid: side must be at least 2");
  }

  int wrap(int a) const { return ((a % side) + side) % side; }
  int min_image(int a) const
  {
    int r = wrap(a);
    return r > side / 2 ? r - side : r;
  }
  std::size_t index(const Point& x) const
  {
    std::size_t i = 0;
    for (int d = 0; d < kDim; ++d) i = i * side + wrap(x[d]);
    return i;
  }
  Point point(std::size_t i) const
  {
    Point x{};
    for (int d = kDim - 1; d >= 0; --d) {
      x[d] = static_cast<int>(i % side);
      i /= side;
    }
    return x;
  }
  double& operator()(const Point& x) { return values[index(x)]; }
  double operator()(const Point& x) const { return values[index(x)]; }
  std::size_t size() const { return values.size(); }
};

inline double multiplier(const Momentum& k)
{
  double s = 0.0;
  for (double kj : k) {
    const double v = std::sin(std::numbers::pi * kj);
    s += v * v;
  }
  return 4.0 * s;
}

// 4 sin^2(pi k / M) for k = 0..M-1.
inline std::vector<double> axis_multiplier(int m)
{
  std::vector<double> s(m);
  for (int k = 0; k < m; ++k) {
    const double v = std::sin(std::numbers::pi * k / m);
    s[k] = 4.0 * v * v;
  }
  return s;
}

inline void check_resolution(double m2, int m, const char* who)
{
  if (!(m2 > 0.0)) throw std::invalid_argument(std::string(who) + ": m2 must be positive");
  if (m < 8 || m % 2 != 0) throw std::invalid_argument(std::string(who) + ": resolution must be even and >= 8");
}

// Riemann sum over the torus (Z/MZ)^4 of e^{2 pi i k.x/M} / (lambda(k) + m2).
inline double green_function(double m2, const Point& x, int m)
{
  check_resolution(m2, m, "green_function");
  const auto s = axis_multiplier(m);
  std::array<std::vector<double>, kDim> c;
  for (int d = 0; d < kDim; ++d) {
    c[d].resize(m);
    for (int k = 0; k < m; ++k) c[d][k] = std::cos(2.0 * std::numbers::pi * k * x[d] / m);
  }
  double total = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const double ab = s[a] + s[b] + m2, cab = c[0][a] * c[1][b];
      double part = 0.0;
      for (int e = 0; e < m; ++e) {
        const double abe = ab + s[e], ce = cab * c[2][e];
        for (int f = 0; f < m; ++f) part += ce * c[3][f] / (abe + s[f]);
      }
      total += part;
    }
  return total / std::pow(static_cast<double>(m), 4);
}

// Inverse DFT of an even, per-axis-symmetric Fourier profile on the M-torus.
template <class Profile>
KernelGrid inverse_dft_even(int m, Profile&& hat, double m2 = 0.0, int scale = -1)
{
  KernelGrid g(m, m2, scale);
  std::vector<double> cs(static_cast<std::size_t>(m) * m);
  for (int k = 0; k < m; ++k)
    for (int x = 0; x < m; ++x) cs[k * m + x] = std::cos(2.0 * std::numbers::pi * k * x / m);
  const auto s = axis_multiplier(m);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Point k = g.point(i);
    g.values[i] = hat(s[k[0]] + s[k[1]] + s[k[2]] + s[k[3]]);
  }
  std::vector<double> line(m), out(m);
  for (int axis = 0; axis < kDim; ++axis) {
    std::size_t stride = 1;
    for (int d = kDim - 1; d > axis; --d) stride *= m;
    for (std::size_t base = 0; base < g.size(); ++base) {
      if ((base / stride) % m != 0) continue;
      for (int k = 0; k < m; ++k) line[k] = g.values[base + k * stride];
      for (int x = 0; x < m; ++x) {
        double acc = 0.0;
        for (int k = 0; k < m; ++k) acc += cs[k * m + x] * line[k];
        out[x] = acc;
      }
      for (int x = 0; x < m; ++x) g.values[base + x * stride] = out[x] / m;
    }
  }
  return g;
}

inline KernelGrid green_grid(double m2, int m)
{
  check_resolution(m2, m, "green_grid");
  return inverse_dft_even(m, [m2](double lam) { return 1.0 / (lam + m2); }, m2);
}

struct QuadratureResult {
  double value = 0.0;
  double coarse = 0.0;
  double relative_gap = 0.0;
  bool resolved = false;
};

inline double torus_bubble_sum(double m2, int m)
{
  const auto s = axis_multiplier(m);
  double total = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int e = 0; e < m; ++e) {
        const double abe = s[a] + s[b] + s[e] + m2;
        for (int f = 0; f < m; ++f) {
          const double r = 1.0 / (abe + s[f]);
          total += r * r;
        }
      }
  return total / std::pow(static_cast<double>(m), 4);
}

// Riemann sum of (lambda + m2)^{-2} at resolution M with an M/2 cross-check.
inline QuadratureResult bubble(double m2, int m, double tol = 1e-3)
{
  check_resolution(m2, m, "bubble");
  QuadratureResult r;
  r.value = torus_bubble_sum(m2, m);
  r.coarse = torus_bubble_sum(m2, m / 2);
  r.relative_gap = std::abs(r.value - r.coarse) / r.value;
  r.resolved = r.relative_gap <= tol;
  return r;
}

// Infinite-volume quantities from the Laplace transform of the heat kernel:
// (lambda+m2)^{-1} = int_0^inf e^{-t(lambda+m2)} dt, and the 4-d kernel
// factorises into one-dimensional kernels q_t(x_i).

inline double heat_tmax(double m2) { return m2 > 0.0 ? std::min(1e40, 750.0 / m2) : 1e40; }

inline double q1(double t, int x)
{
  x = std::abs(x);
  if (t >= hk::kEdgeworthT) return hk::edgeworth_q(t, x);
  hk::quiet_gsl();
  return gsl_sf_bessel_In_scaled(x, 2.0 * t);
}

inline double green_infinite(double m2, const Point& x)
{
  if (m2 < 0.0) throw std::invalid_argument("green_infinite: m2 must be non-negative");
  return integrate_half_line(
      [&](double t) {
        double k = std::exp(-t * m2);
        for (int d = 0; d < kDim; ++d) k *= q1(t, x[d]);
        return k;
      },
      heat_tmax(m2));
}

inline double delta_inv_origin() { return green_infinite(0.0, {0, 0, 0, 0}); }

inline double bubble_infinite(double m2)
{
  if (!(m2 > 0.0)) throw std::invalid_argument("bubble_infinite: m2 must be positive");
  return integrate_half_line(
      [&](double t) {
        const double p = hk::P(0, t);
        return t * std::exp(-t * m2) * p * p * p * p;
      },
      heat_tmax(m2));
}

inline void check_components(int n)
{
  if (n < 0) throw std::invalid_argument("component count must be non-negative");
}

// -n |T_N|^{-1} sum_k log(lambda(k) + m2) over the momenta of the torus of side L^N.
inline double free_pressure(int n, double m2, int N, int L)
{
  check_components(n);
  if (!(m2 > 0.0)) throw std::invalid_argument("free_pressure: finite volume needs m2 > 0");
  if (L < 2 || N < 1) throw std::invalid_argument("free_pressure: need L >= 2, N >= 1");
  const int m = static_cast<int>(std::lround(std::pow(L, N)));
  const auto s = axis_multiplier(m);
  double total = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int e = 0; e < m; ++e) {
        const double abe = s[a] + s[b] + s[e] + m2;
        double part = 0.0;
        for (int f = 0; f < m; ++f) part += std::log(abe + s[f]);
        total += part;
      }
  return -n * total / std::pow(static_cast<double>(m), 4);
}

// N = infinity: int log(lambda+m2) dk = int_0^inf (e^{-t} - e^{-t m2} P_0(t)^4) dt / t.
inline double free_pressure_infinite(int n, double m2)
{
  check_components(n);
  if (m2 < 0.0) throw std::invalid_argument("free_pressure_infinite: m2 must be non-negative");
  const double integral = integrate_half_line(
      [&](double t) {
        const double p = hk::P(0, t);
        const double p4 = p * p * p * p;
        return (std::exp(-t) - std::exp(-t * m2) * p4) / t;
      },
      1e40);
  return -n * integral;
}

// [p(m2+h) - 2 p(m2) + p(m2-h)] / h^2 for the N = infinity free pressure,
// combined under the integral so that no cancellation occurs.
inline double free_pressure_second_difference(int n, double m2, double h)
{
  check_components(n);
  if (!(m2 > h && h > 0.0)) throw std::invalid_argument("free_pressure_second_difference: need m2 > h > 0");
  const double integral = integrate_half_line(
      [&](double t) {
        const double p = hk::P(0, t);
        const double sh = std::sinh(0.5 * t * h);
        return std::exp(-t * m2) * p * p * p * p * 4.0 * sh * sh / (t * h * h);
      },
      heat_tmax(m2 - h));
  return n * integral;
}

struct FreeTheoryConstants {
  double bubble = 0.0;
  double green_origin = 0.0;
  double delta_inv_origin = 0.0;
  double a = 0.0;
  double b = 0.0;
  int gamma_num = 0;
  int gamma_den = 1;
  double gamma() const { return static_cast<double>(gamma_num) / gamma_den; }
};

inline FreeTheoryConstants free_constants(int n, double m2)
{
  check_components(n);
  FreeTheoryConstants c;
  c.bubble = bubble_infinite(m2);
  c.green_origin = green_infinite(m2, {0, 0, 0, 0});
  c.delta_inv_origin = delta_inv_origin();
  c.a = (n + 2) * c.delta_inv_origin;
  c.b = (n + 8) / (16.0 * std::numbers::pi * std::numbers::pi);
  c.gamma_num = n + 2;
  c.gamma_den = n + 8;
  return c;
}

}  // namespace phi4
