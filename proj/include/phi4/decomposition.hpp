#pragma once

// Heat-kernel multiscale decomposition (lambda+m2)^{-1} = sum_j C_j with
// C_j = int_{t_{j-1}}^{t_j} e^{-t(lambda+m2)} dt, t_j = L^{2j}, t_0 = 0.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "lattice.hpp"
#include "quadrature.hpp"

namespace phi4 {

struct MassScale {
  int j = 0;
  bool infinite = false;
};

inline MassScale mass_scale(double m2, int L)
{
  if (m2 < 0.0) throw std::invalid_argument("mass_scale: m2 must be non-negative");
  if (L < 2) throw std::invalid_argument("mass_scale: L must be at least 2");
  if (m2 == 0.0) return {0, true};
  const double x = -0.5 * std::log(m2) / std::log(static_cast<double>(L));
  return {static_cast<int>(std::floor(x + 1e-10)), false};
}

inline double chi(int j, const MassScale& jm, double omega = 2.0)
{
  if (jm.infinite || j <= jm.j) return 1.0;
  return std::pow(omega, -(j - jm.j));
}

inline double scale_time(int L, int j) { return j <= 0 ? 0.0 : std::pow(static_cast<double>(L), 2.0 * j); }

// int_a^b e^{-t x} dt, stable for small x (b may be infinite).
inline double laplace_window(double a, double b, double x)
{
  if (x == 0.0) return b - a;
  if (std::isinf(b)) return std::exp(-a * x) / x;
  return std::exp(-a * x) * (-std::expm1(-(b - a) * x)) / x;
}

// Gauss-Legendre nodes on the scale window [t_{j-1}, t_j].
inline std::vector<Node> scale_nodes(int L, int j, int order)
{
  if (j == 1) {
    auto out = gauss_legendre(order, 0.0, 1.0);
    auto hi = gauss_legendre_log(order, 1.0, scale_time(L, 1));
    out.insert(out.end(), hi.begin(), hi.end());
    return out;
  }
  return gauss_legendre_log(order, scale_time(L, j - 1), scale_time(L, j));
}

// Periodised one-dimensional heat kernel on Z/MZ, x = 0..M-1.
inline std::vector<double> torus_profile(double t, int m)
{
  const auto s = axis_multiplier(m);
  std::vector<double> q(m, 0.0);
  for (int x = 0; x < m; ++x) {
    double acc = 0.0;
    for (int k = 0; k < m; ++k) acc += std::exp(-t * s[k]) * std::cos(2.0 * std::numbers::pi * k * x / m);
    q[x] = acc / m;
  }
  return q;
}

struct ScaleDecomposition {
  int L = 2;
  int J_max = 1;
  double m2 = 0.0;
  int M_cap = 32;
  int order = 12;
  std::vector<double> t;             // t[j] = L^{2j}
  std::vector<KernelGrid> kernels;   // kernels[j-1] = C_j on its torus
  std::vector<int> sides;            // torus side used for C_j
  std::vector<bool> truncated;       // side was capped below 4 L^j

  double profile(int j, double lam) const
  {
    if (j < 1 || j > J_max) throw std::out_of_range("profile: scale out of range");
    return laplace_window(t[j - 1], t[j], lam + m2);
  }
  double tail(double lam) const
  {
    return laplace_window(t[J_max], std::numeric_limits<double>::infinity(), lam + m2);
  }
  double partial_profile(int j, double lam) const { return laplace_window(0.0, t[j], lam + m2); }

  // Final-scale covariance of the torus of side L^N: the rest of the integral.
  double final_profile(int N, double lam) const
  {
    return laplace_window(scale_time(L, N - 1), std::numeric_limits<double>::infinity(), lam + m2);
  }

  // C_{j;x,0} on Z^4.
  double kernel_value(int j, const Point& x) const
  {
    double s = 0.0;
    for (const auto& nd : scale_nodes(L, j, 2 * order)) {
      double k = nd.weight * std::exp(-nd.t * m2);
      for (int d = 0; d < kDim; ++d) k *= q1(nd.t, x[d]);
      s += k;
    }
    return s;
  }

  // C_j on the torus of side M: exact torus kernel via per-axis periodised heat kernels.
  KernelGrid torus_kernel(int j, int m) const
  {
    KernelGrid g(m, m2, j);
    for (const auto& nd : scale_nodes(L, j, 2 * order)) {
      const auto q = torus_profile(nd.t, m);
      const double w = nd.weight * std::exp(-nd.t * m2);
      std::size_t i = 0;
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          const double ab = w * q[a] * q[b];
          for (int c = 0; c < m; ++c) {
            const double abc = ab * q[c];
            for (int d = 0; d < m; ++d) g.values[i++] += abc * q[d];
          }
        }
    }
    return g;
  }

  // Fraction of sum_x C_{j;x,0} carried by |x|_inf >= L^j / 2 on Z^4.
  double mass_outside_half_range(int j) const
  {
    const double half = 0.5 * std::pow(static_cast<double>(L), j);
    const int r = static_cast<int>(std::ceil(half)) - 1;
    double inside = 0.0, total = 0.0;
    for (const auto& nd : scale_nodes(L, j, 2 * order)) {
      const double w = nd.weight * std::exp(-nd.t * m2);
      const auto q = hk::profile(nd.t, std::max(r, 0));
      double s = q[0];
      for (int x = 1; x <= r; ++x) s += 2.0 * q[x];
      inside += w * s * s * s * s;
      total += w;
    }
    return 1.0 - inside / total;
  }
};

inline ScaleDecomposition decompose(double m2, int L, int J_max, int M_cap = 32, bool build_kernels = true)
{
  if (m2 < 0.0) throw std::invalid_argument("decompose: m2 must be non-negative");
  if (L < 2) throw std::invalid_argument("decompose: L must be at least 2");
  if (J_max < 1) throw std::invalid_argument("decompose: J_max must be at least 1");
  if (M_cap < 4) throw std::invalid_argument("decompose: M_cap must be at least 4");
  ScaleDecomposition d;
  d.L = L;
  d.J_max = J_max;
  d.m2 = m2;
  d.M_cap = M_cap;
  d.t.resize(J_max + 1);
  for (int j = 0; j <= J_max; ++j) d.t[j] = scale_time(L, j);
  for (int j = 1; j <= J_max; ++j) {
    const double want = 4.0 * std::pow(static_cast<double>(L), j);
    const int side = static_cast<int>(std::min<double>(want, M_cap));
    d.sides.push_back(side);
    d.truncated.push_back(side < want);
    if (build_kernels) d.kernels.push_back(d.torus_kernel(j, side));
  }
  return d;
}

struct ScalingReport {
  int j = 0;
  Point alpha{};
  double sup = 0.0;
  double scaled = 0.0;      // sup * L^{(j-1)(2+|alpha|_1)}
  double chi = 1.0;
  bool within_constant = true;
};

// sup_x |nabla^alpha C_{j;x,0}| over the plane x = (a, b, 0, 0), |a|, |b| <= 3 L^j,
// with forward differences.
inline ScalingReport scaling_diagnostic(const ScaleDecomposition& d, int j, const Point& alpha,
                                        double constant = std::numeric_limits<double>::infinity(),
                                        double omega = 2.0)
{
  if (j < 1 || j > d.J_max) throw std::out_of_range("scaling_diagnostic: scale out of range");
  int order1 = 0;
  for (int a : alpha) {
    if (a < 0) throw std::invalid_argument("scaling_diagnostic: negative multi-index");
    order1 += a;
  }
  if (order1 > 2 || alpha[2] + alpha[3] > 0)
    throw std::invalid_argument("scaling_diagnostic: need |alpha|_1 <= 2 along the first two axes");
  const int R = std::min(300, static_cast<int>(3 * std::pow(static_cast<double>(d.L), j)) + 2);
  const int n = 2 * R + 1;
  std::vector<double> plane(static_cast<std::size_t>(n) * n, 0.0);
  auto diff = [](const std::vector<double>& q, int R, int times) {
    // q indexed by x + R + 2 on [-R-2, R+2]; returns forward differences on [-R, R].
    std::vector<double> f(q);
    for (int k = 0; k < times; ++k)
      for (std::size_t i = 0; i + 1 < f.size(); ++i) f[i] = f[i + 1] - f[i];
    std::vector<double> out(2 * R + 1);
    for (int x = -R; x <= R; ++x) out[x + R] = f[x + R + 2];
    return out;
  };
  for (const auto& nd : scale_nodes(d.L, j, 2 * d.order)) {
    const auto half = hk::profile(nd.t, R + 2);
    std::vector<double> full(2 * R + 5);
    for (int x = -R - 2; x <= R + 2; ++x) full[x + R + 2] = half[std::abs(x)];
    const auto qa = diff(full, R, alpha[0]);
    const auto qb = diff(full, R, alpha[1]);
    const double w = nd.weight * std::exp(-nd.t * d.m2) * half[0] * half[0];
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) plane[static_cast<std::size_t>(a) * n + b] += w * qa[a] * qb[b];
  }
  ScalingReport r;
  r.j = j;
  r.alpha = alpha;
  for (double v : plane) r.sup = std::max(r.sup, std::abs(v));
  r.scaled = r.sup * std::pow(static_cast<double>(d.L), (j - 1) * (2.0 + order1));
  r.chi = chi(j, mass_scale(d.m2, d.L), omega);
  r.within_constant = r.scaled <= constant * r.chi;
  return r;
}

}  // namespace phi4
