#pragma once

// Infinite-volume Z^4 moments of the heat-kernel decomposition.
//
// Every moment is an integral over heat-kernel times of products of the
// factorised kernel K_t(x) = prod_i q_t(x_i). delta[f] at scale j collects the
// node tuples whose largest scale window is j+1; node data are independent of
// m2, so one engine serves every mass. Pair data are exact at all scales;
// triple and quadruple data are exact up to a lattice depth and continued by
// the scaling covariance of the heat kernel beyond it.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "bessel.hpp"
#include "decomposition.hpp"
#include "moments.hpp"

namespace phi4 {

struct EngineOptions {
  int L = 2;
  int windows = 64;        // scale windows with exact pair data
  int lattice_depth = 8;   // scale windows with exact triple/quadruple data
  int order_pairs = 8;
  int order_triples = 8;
  int order_quads = 7;
  double table_lo = -22.0;  // log10(mu t_ref) range of the scaling tables
  double table_hi = 4.0;
  int table_points = 1301;

  auto key() const
  {
    return std::tuple(L, windows, lattice_depth, order_pairs, order_triples, order_quads, table_lo, table_hi,
                      table_points);
  }
};

// w^(1) and w^(**) of w = int_0^T e^{-t m2} K_t dt.
inline double w1_closed(double m2, double T)
{
  if (T == 0.0) return 0.0;
  if (m2 == 0.0) return T;
  return -std::expm1(-m2 * T) / m2;
}

inline double wss_closed(double m2, double T)
{
  if (T == 0.0) return 0.0;
  const double x = m2 * T;
  if (x == 0.0) return T * T;
  if (x < 0.5) {
    // 1 - e^{-x}(1+x) = sum_{k>=2} (-1)^k (k-1) x^k / k!
    double s = 0.0, term = x * x / 2.0;
    for (int k = 2; k < 40; ++k) {
      s += ((k & 1) ? -1.0 : 1.0) * (k - 1) * term;
      term *= x / (k + 1);
    }
    return 2.0 * s / (m2 * m2);
  }
  return 2.0 * (1.0 - std::exp(-x) * (1.0 + x)) / (m2 * m2);
}

class HeatKernelEngine {
 public:
  explicit HeatKernelEngine(EngineOptions opt) : opt_(opt)
  {
    if (opt_.L < 2) throw std::invalid_argument("HeatKernelEngine: L must be at least 2");
    if (opt_.lattice_depth < 2 || opt_.lattice_depth > opt_.windows)
      throw std::invalid_argument("HeatKernelEngine: lattice depth out of range");
    build_singles_and_pairs();
    build_triples();
    build_quads();
    build_tables();
  }

  const EngineOptions& options() const { return opt_; }
  int max_scale() const { return opt_.windows - 1; }

  // Inputs for scales j = 0..J at mass m2.
  std::vector<PtInputs> inputs(double m2, int J) const
  {
    if (m2 < 0.0) throw std::invalid_argument("inputs: m2 must be non-negative");
    if (J > max_scale()) throw std::out_of_range("inputs: scale beyond engine range");
    const int K = J + 1;
    std::vector<double> E1 = exps(n1_, m2);
    std::vector<Bucket> b(K + 1);
    for (const auto& nd : n1_) {
      if (nd.k > K) break;
      const double e = E1[&nd - n1_.data()];
      if (e == 0.0) continue;
      b[nd.k].C += e * nd.c;
      b[nd.k].DC += e * nd.dc;
    }
    for (const auto& p : pairs_) {
      if (p.k > K) continue;
      const double e = E1[p.a] * E1[p.b];
      if (e == 0.0) continue;
      for (int q = 0; q < 6; ++q) b[p.k].pair[q] += e * p.v[q];
    }
    const int depth = std::min(K, opt_.lattice_depth);
    {
      const auto E3 = exps(n3_, m2);
      for (const auto& tr : triples_) {
        if (tr.k > depth) continue;
        const double e = E3[tr.i[0]] * E3[tr.i[1]] * E3[tr.i[2]];
        for (int q = 0; q < 3; ++q) b[tr.k].tri[q] += e * tr.v[q];
      }
      const auto E4 = exps(n4_, m2);
      for (const auto& qd : quads_) {
        if (qd.k > depth) continue;
        b[qd.k].quad += E4[qd.i[0]] * E4[qd.i[1]] * E4[qd.i[2]] * E4[qd.i[3]] * qd.v;
      }
    }
    const int kref = opt_.lattice_depth;
    const double L2 = static_cast<double>(opt_.L) * opt_.L;
    for (int k = depth + 1; k <= K; ++k) {
      const int steps = k - kref;
      const double mu = m2 * std::pow(L2, steps);
      for (int q = 0; q < 3; ++q) b[k].tri[q] = std::pow(L2, -kTriplePower[q] * 0.5 * steps) * table(q, mu);
      b[k].quad = std::pow(L2, -2.0 * steps) * table(3, mu);
    }

    std::vector<PtInputs> out(J + 1);
    double w2 = 0.0, w2ss = 0.0, w3ss = 0.0;
    for (int j = 0; j <= J; ++j) {
      const Bucket& c = b[j + 1];
      PtInputs& p = out[j];
      const double tj = scale_time(opt_.L, j), tj1 = scale_time(opt_.L, j + 1);
      p.C00 = c.C;
      p.DC00 = c.DC;
      p.w1 = w1_closed(m2, tj);
      p.w1p = w1_closed(m2, tj1);
      p.wss = wss_closed(m2, tj);
      p.wssp = wss_closed(m2, tj1);
      p.w2 = w2;
      p.w2ss = w2ss;
      p.w3ss = w3ss;
      p.d_w2 = c.pair[0];
      p.d_w3ss = c.tri[1];
      p.X3 = c.tri[2];
      p.d_wDw1 = c.pair[2];
      p.d_wDwss = c.pair[3];
      p.d_grad = c.pair[4];
      p.d_Dw2 = c.pair[5];
      p.E = c.quad;
      w2 += c.pair[0];
      w2ss += c.pair[1];
      w3ss += c.tri[1];
      p.w2ssp = w2ss;
    }
    return out;
  }

  // delta[w^(3)] at scales 0..J from the exact lattice sums (J < lattice depth).
  std::vector<double> delta_w3(double m2, int J) const
  {
    const auto E3 = exps(n3_, m2);
    std::vector<double> d(J + 1, 0.0);
    for (const auto& tr : triples_)
      if (tr.k <= J + 1) d[tr.k - 1] += E3[tr.i[0]] * E3[tr.i[1]] * E3[tr.i[2]] * tr.v[0];
    return d;
  }

 private:
  // exponents p in delta ~ L^{-p j} for (w^(3), (w^3)^(**), X3)
  static constexpr std::array<double, 3> kTriplePower{2.0, 0.0, 2.0};

  struct ENode {
    double t, w;
    int k;
    double c = 0.0, dc = 0.0;  // weight * P0^4, weight * (P0^4)'
  };
  struct Pair {
    int a, b, k;
    std::array<double, 6> v;  // w2, w2ss, wDw1, wDwss, grad, Dw2
  };
  struct Triple {
    std::array<int, 3> i;
    int k;
    std::array<double, 3> v;  // w3, w3ss, X3 integrand
  };
  struct Quad {
    std::array<int, 4> i;
    int k;
    double v;
  };
  struct Bucket {
    double C = 0.0, DC = 0.0;
    std::array<double, 6> pair{};
    std::array<double, 3> tri{};
    double quad = 0.0;
  };

  static std::vector<double> exps(const std::vector<ENode>& n, double m2)
  {
    std::vector<double> e(n.size());
    for (std::size_t i = 0; i < n.size(); ++i) e[i] = m2 == 0.0 ? 1.0 : std::exp(-m2 * n[i].t);
    return e;
  }

  std::vector<ENode> make_nodes(int windows, int order) const
  {
    std::vector<ENode> out;
    for (int k = 1; k <= windows; ++k)
      for (const auto& nd : scale_nodes(opt_.L, k, order)) out.push_back({nd.t, nd.weight, k});
    return out;
  }

  void build_singles_and_pairs()
  {
    n1_ = make_nodes(opt_.windows, opt_.order_pairs);
    for (auto& nd : n1_) {
      const double p0 = hk::P(0, nd.t);
      nd.c = nd.w * p0 * p0 * p0 * p0;
      nd.dc = nd.w * 4.0 * p0 * p0 * p0 * hk::dP0(nd.t);
    }
    for (int a = 0; a < static_cast<int>(n1_.size()); ++a)
      for (int b = a; b < static_cast<int>(n1_.size()); ++b) {
        const double s = n1_[a].t, t = n1_[b].t, u = s + t;
        const double P0 = hk::P(0, u), P1 = hk::P(1, u);
        const double d0 = hk::dP0(u), dd0 = hk::ddP0(u), dP1 = hk::dP1(u);
        const double P0mP1 = hk::comb(u, {1, -1, 0, 0, 0}), P1mP2 = hk::comb(u, {0, 1, -1, 0, 0});
        const double st = s * t / u, P02 = P0 * P0, P03 = P02 * P0;
        const double M2 = 2.0 * st * P1;
        const double G = -d0;
        const double R = P0mP1 + 4.0 * st * P1mP2;
        const double mult = a == b ? 1.0 : 2.0;
        // (w Delta w)^(**): d/dt [M2 P0^3] with Delta acting on the t-kernel, summed over both orders
        auto dwd = [&](double x, double y) {
          return (2.0 * x * x * P1 / (u * u) + 2.0 * x * y / u * dP1) * P03 + 3.0 * M2 * P02 * d0;
        };
        const double wDwss = a == b ? dwd(s, t) : dwd(s, t) + dwd(t, s);
        const double ww = n1_[a].w * n1_[b].w;
        Pair p{a, b, n1_[b].k, {}};
        p.v[0] = ww * mult * P02 * P02;
        p.v[1] = ww * mult * M2 * P03;
        p.v[2] = ww * mult * 4.0 * P03 * d0;
        p.v[3] = ww * wDwss;
        p.v[4] = ww * mult * (3.0 * M2 * G * P02 + R * P03);
        p.v[5] = ww * mult * (12.0 * P02 * d0 * d0 + 4.0 * P03 * dd0);
        pairs_.push_back(p);
      }
  }

  static double sum_product(const std::vector<const std::vector<double>*>& q, int X, double weight_x2)
  {
    // sum over x in [-X, X] of prod_i q_i(|x|), with optional x^2 weight
    double s = 1.0;
    for (auto* v : q) s *= (*v)[0];
    if (weight_x2 != 0.0) s = 0.0;
    for (int x = 1; x <= X; ++x) {
      double p = 2.0;
      for (auto* v : q) p *= (*v)[x];
      s += weight_x2 != 0.0 ? p * x * x : p;
    }
    return s;
  }

  std::vector<std::vector<double>> profiles(const std::vector<ENode>& n) const
  {
    std::vector<std::vector<double>> pr;
    for (const auto& nd : n) pr.push_back(hk::profile(nd.t, hk::support(nd.t)));
    return pr;
  }

  static int multiplicity(const int* idx, int m)
  {
    // number of distinct orderings of a sorted index tuple
    int f = 1, run = 1, total = 1;
    for (int i = 1; i <= m; ++i) total *= i;
    for (int i = 1; i < m; ++i) {
      if (idx[i] == idx[i - 1]) {
        ++run;
        f *= run;
      } else {
        run = 1;
      }
    }
    return total / f;
  }

  void build_triples()
  {
    n3_ = make_nodes(opt_.lattice_depth, opt_.order_triples);
    const auto pr = profiles(n3_);
    const int N = static_cast<int>(n3_.size());
    for (int a = 0; a < N; ++a)
      for (int b = a; b < N; ++b)
        for (int c = b; c < N; ++c) {
          const int X = hk::support(std::min({n3_[a].t, n3_[b].t, n3_[c].t}));
          const std::vector<const std::vector<double>*> q{&pr[a], &pr[b], &pr[c]};
          const double T3 = sum_product(q, X, 0.0), T3x = sum_product(q, X, 1.0);
          const int idx[3] = {a, b, c};
          const double w = multiplicity(idx, 3) * n3_[a].w * n3_[b].w * n3_[c].w;
          const double T33 = T3 * T3 * T3;
          double x3 = T33 * T3;
          if (n3_[b].k < n3_[c].k) {
            const double pp = hk::P(0, n3_[a].t + n3_[b].t), pc = hk::P(0, n3_[c].t);
            x3 -= pp * pp * pp * pp * pc * pc * pc * pc;
          }
          triples_.push_back({{a, b, c}, n3_[c].k, {w * T33 * T3, w * T3x * T33, w * x3}});
        }
  }

  void build_quads()
  {
    n4_ = make_nodes(opt_.lattice_depth, opt_.order_quads);
    const auto pr = profiles(n4_);
    const int N = static_cast<int>(n4_.size());
    for (int a = 0; a < N; ++a)
      for (int b = a; b < N; ++b)
        for (int c = b; c < N; ++c)
          for (int d = c; d < N; ++d) {
            const int X = hk::support(std::min({n4_[a].t, n4_[b].t, n4_[c].t, n4_[d].t}));
            const double T4 = sum_product({&pr[a], &pr[b], &pr[c], &pr[d]}, X, 0.0);
            const int idx[4] = {a, b, c, d};
            const double w = multiplicity(idx, 4) * n4_[a].w * n4_[b].w * n4_[c].w * n4_[d].w;
            double v = T4 * T4 * T4 * T4;
            const int top = n4_[d].k;
            if (n4_[c].k < top) {
              const std::vector<const std::vector<double>*> q{&pr[a], &pr[b], &pr[c]};
              const double T3 = sum_product(q, X, 0.0), T3x = sum_product(q, X, 1.0);
              const double pd = hk::P(0, n4_[d].t), pd3 = pd * pd * pd;
              v -= pd3 * pd * T3 * T3 * T3 * T3 + 0.5 * 4.0 * pd3 * hk::dP0(n4_[d].t) * T3x * T3 * T3 * T3;
            } else if (n4_[b].k < top) {
              const double pc = hk::P(0, n4_[c].t), pd = hk::P(0, n4_[d].t), pab = hk::P(0, n4_[a].t + n4_[b].t);
              const double x = pc * pd * pab;
              v -= x * x * x * x;
            }
            quads_.push_back({{a, b, c, d}, top, w * v});
          }
  }

  // Reference-window values as functions of the mass, tabulated in log10(mu t_ref).
  void build_tables()
  {
    const int kref = opt_.lattice_depth;
    tref_ = scale_time(opt_.L, kref);
    const int P = opt_.table_points;
    table_h_ = (opt_.table_hi - opt_.table_lo) / (P - 1);
    for (auto& t : tables_) t.assign(P, 0.0);
    auto eval = [&](double mu, std::array<double, 4>& out) {
      out.fill(0.0);
      const auto E3 = exps(n3_, mu);
      for (const auto& tr : triples_)
        if (tr.k == kref) {
          const double e = E3[tr.i[0]] * E3[tr.i[1]] * E3[tr.i[2]];
          for (int q = 0; q < 3; ++q) out[q] += e * tr.v[q];
        }
      const auto E4 = exps(n4_, mu);
      for (const auto& qd : quads_)
        if (qd.k == kref) out[3] += E4[qd.i[0]] * E4[qd.i[1]] * E4[qd.i[2]] * E4[qd.i[3]] * qd.v;
    };
    std::array<double, 4> v{};
    eval(0.0, v);
    zero_ = v;
    for (int i = 0; i < P; ++i) {
      eval(std::pow(10.0, opt_.table_lo + i * table_h_) / tref_, v);
      for (int q = 0; q < 4; ++q) tables_[q][i] = v[q];
    }
  }

  double table(int q, double mu) const
  {
    if (mu == 0.0) return zero_[q];
    const double s = std::log10(mu * tref_);
    if (s <= opt_.table_lo) return zero_[q];
    if (s >= opt_.table_hi) return 0.0;
    const double x = (s - opt_.table_lo) / table_h_;
    int i = static_cast<int>(std::floor(x));
    i = std::clamp(i, 1, opt_.table_points - 3);
    const double f = x - i;
    const auto& T = tables_[q];
    // cubic convolution on i-1..i+2
    const double a = T[i - 1], b = T[i], c = T[i + 1], d = T[i + 2];
    return b + 0.5 * f * (c - a + f * (2.0 * a - 5.0 * b + 4.0 * c - d + f * (3.0 * (b - c) + d - a)));
  }

  EngineOptions opt_;
  std::vector<ENode> n1_, n3_, n4_;
  std::vector<Pair> pairs_;
  std::vector<Triple> triples_;
  std::vector<Quad> quads_;
  double tref_ = 1.0, table_h_ = 1.0;
  std::array<std::vector<double>, 4> tables_;
  std::array<double, 4> zero_{};
};

// Engines are expensive to build and immutable; share them per option set.
inline std::shared_ptr<const HeatKernelEngine> shared_engine(const EngineOptions& opt)
{
  static std::mutex mu;
  static std::map<decltype(opt.key()), std::shared_ptr<const HeatKernelEngine>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(opt.key());
  if (it != cache.end()) return it->second;
  auto e = std::make_shared<const HeatKernelEngine>(opt);
  cache.emplace(opt.key(), e);
  return e;
}

}  // namespace phi4
