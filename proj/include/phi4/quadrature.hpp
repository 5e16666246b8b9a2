#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include <gsl/gsl_integration.h>

namespace phi4 {

struct Node {
  double t;
  double weight;
};

// Gauss-Legendre nodes on [a, b].
inline std::vector<Node> gauss_legendre(int order, double a, double b)
{
  gsl_integration_glfixed_table* tab = gsl_integration_glfixed_table_alloc(order);
  if (!tab) throw std::runtime_error("gauss_legendre: allocation failed");
  std::vector<Node> out(order);
  for (int i = 0; i < order; ++i) {
    double x, w;
    gsl_integration_glfixed_point(a, b, i, &x, &w, tab);
    out[i] = {x, w};
  }
  gsl_integration_glfixed_table_free(tab);
  return out;
}

// Gauss-Legendre in log t on [a, b], a > 0; weights include the Jacobian t.
inline std::vector<Node> gauss_legendre_log(int order, double a, double b)
{
  auto nodes = gauss_legendre(order, std::log(a), std::log(b));
  for (auto& n : nodes) {
    n.t = std::exp(n.t);
    n.weight *= n.t;
  }
  return nodes;
}

// Nodes for integrals over [0, tmax]: linear on [0, 1], then log-spaced
// panels of ratio 4.
inline std::vector<Node> half_line_nodes(double tmax, int order = 16)
{
  auto out = gauss_legendre(order, 0.0, std::min(1.0, tmax));
  for (double a = 1.0; a < tmax; a *= 4.0) {
    auto panel = gauss_legendre_log(order, a, std::min(4.0 * a, tmax));
    out.insert(out.end(), panel.begin(), panel.end());
  }
  return out;
}

template <class F>
double integrate_half_line(F&& f, double tmax, int order = 16)
{
  double s = 0.0;
  for (const auto& n : half_line_nodes(tmax, order)) s += n.weight * f(n.t);
  return s;
}

}  // namespace phi4
