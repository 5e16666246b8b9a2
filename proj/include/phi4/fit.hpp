#pragma once

// Weighted straight-line fits with leave-one-out jackknife errors.

#include <gsl/gsl_fit.h>

#include <cmath>
#include <stdexcept>
#include <vector>

namespace phi4 {

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_error = 0.0;        // jackknife
  double intercept_error = 0.0;    // jackknife
  double residual = 0.0;           // weighted sum of squared residuals
  int points = 0;
};

inline void wlinear(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& w,
                    double& c0, double& c1, double& chisq)
{
  double cov00, cov01, cov11;
  if (gsl_fit_wlinear(x.data(), 1, w.data(), 1, y.data(), 1, x.size(), &c0, &c1, &cov00, &cov01, &cov11, &chisq))
    throw std::runtime_error("linear_fit: degenerate data");
}

// y = intercept + slope x; weights default to 1.
inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y, std::vector<double> w = {})
{
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw std::invalid_argument("linear_fit: need at least two (x, y) pairs");
  if (w.empty()) w.assign(n, 1.0);
  if (w.size() != n) throw std::invalid_argument("linear_fit: weight count mismatch");
  LinearFit f;
  f.points = static_cast<int>(n);
  wlinear(x, y, w, f.intercept, f.slope, f.residual);
  if (n < 3) return f;
  std::vector<double> s(n), c(n);
  for (std::size_t drop = 0; drop < n; ++drop) {
    std::vector<double> xs, ys, ws;
    for (std::size_t i = 0; i < n; ++i)
      if (i != drop) {
        xs.push_back(x[i]);
        ys.push_back(y[i]);
        ws.push_back(w[i]);
      }
    double chisq;
    wlinear(xs, ys, ws, c[drop], s[drop], chisq);
  }
  double ms = 0.0, mc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ms += s[i] / n;
    mc += c[i] / n;
  }
  double vs = 0.0, vc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    vs += (s[i] - ms) * (s[i] - ms);
    vc += (c[i] - mc) * (c[i] - mc);
  }
  f.slope_error = std::sqrt((n - 1.0) / n * vs);
  f.intercept_error = std::sqrt((n - 1.0) / n * vc);
  return f;
}

// Fit on log-log axes: log y = intercept + slope log x.
inline LinearFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y)
{
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw std::domain_error("loglog_fit: non-positive data");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return linear_fit(lx, ly);
}

// Value at x = 0 of the quadratic through three points.
inline double quadratic_extrapolate(const double x[3], const double y[3])
{
  double r = 0.0;
  for (int i = 0; i < 3; ++i) {
    double l = 1.0;
    for (int k = 0; k < 3; ++k)
      if (k != i) l *= (0.0 - x[k]) / (x[i] - x[k]);
    r += l * y[i];
  }
  return r;
}

}  // namespace phi4
