#pragma once

// Sparse polynomials in the field variables phi_x^i of a small 4-torus,
// with coefficients in double or exact rationals.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "../lattice.hpp"

namespace phi4::oracle {

using Rational = boost::multiprecision::number<boost::multiprecision::cpp_rational_backend, boost::multiprecision::et_off>;

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.convert_to<double>(); }

using Var = std::uint16_t;
inline constexpr int kMaxDegree = 8;

struct Monomial {
  std::array<Var, kMaxDegree> v{};
  std::uint8_t deg = 0;

  std::span<const Var> vars() const { return {v.data(), deg}; }
  bool operator==(const Monomial& o) const
  {
    return deg == o.deg && std::equal(v.begin(), v.begin() + deg, o.v.begin());
  }
  bool operator<(const Monomial& o) const
  {
    if (deg != o.deg) return deg < o.deg;
    return std::lexicographical_compare(v.begin(), v.begin() + deg, o.v.begin(), o.v.begin() + o.deg);
  }
};

inline Monomial make_monomial(std::span<const Var> vars)
{
  if (vars.size() > static_cast<std::size_t>(kMaxDegree))
    throw std::length_error("monomial degree exceeds " + std::to_string(kMaxDegree));
  Monomial m;
  m.deg = static_cast<std::uint8_t>(vars.size());
  std::copy(vars.begin(), vars.end(), m.v.begin());
  std::sort(m.v.begin(), m.v.begin() + m.deg);
  return m;
}

inline Monomial make_monomial(std::initializer_list<Var> vars)
{
  return make_monomial(std::span<const Var>(vars.begin(), vars.size()));
}

inline Monomial operator*(const Monomial& a, const Monomial& b)
{
  if (a.deg + b.deg > kMaxDegree) throw std::length_error("monomial degree exceeds " + std::to_string(kMaxDegree));
  Monomial m;
  m.deg = static_cast<std::uint8_t>(a.deg + b.deg);
  std::merge(a.v.begin(), a.v.begin() + a.deg, b.v.begin(), b.v.begin() + b.deg, m.v.begin());
  return m;
}

template <class S>
class Polynomial {
 public:
  using Map = std::map<Monomial, S>;

  Polynomial() = default;
  explicit Polynomial(const S& c)
  {
    if (c != S(0)) terms_[Monomial{}] = c;
  }

  void add(const Monomial& m, const S& c)
  {
    if (c == S(0)) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == S(0)) terms_.erase(it);
    }
  }

  const Map& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  S coefficient(const Monomial& m) const
  {
    const auto it = terms_.find(m);
    return it == terms_.end() ? S(0) : it->second;
  }
  S constant() const { return coefficient(Monomial{}); }

  int degree() const
  {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max<int>(d, m.deg);
    return d;
  }

  Polynomial& operator+=(const Polynomial& o)
  {
    for (const auto& [m, c] : o.terms_) add(m, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o)
  {
    for (const auto& [m, c] : o.terms_) add(m, -c);
    return *this;
  }
  Polynomial& operator*=(const S& s)
  {
    if (s == S(0)) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, const S& s) { return a *= s; }
  friend Polynomial operator*(const S& s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b)
  {
    Polynomial r;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) r.add(ma * mb, ca * cb);
    return r;
  }
  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.terms_ == b.terms_; }

  // Largest |coefficient| of a - b, in double.
  friend double max_difference(const Polynomial& a, const Polynomial& b)
  {
    double m = 0.0;
    for (const auto& [mon, c] : (a - b).terms_) m = std::max(m, std::abs(to_double(c)));
    return m;
  }

 private:
  Map terms_;
};

// Fields on (Z/SZ)^4 with n components; variable index = site * n + component.
struct SmallTorus {
  int side = 5;
  int n = 1;

  SmallTorus(int side_, int n_) : side(side_), n(n_)
  {
    if (side < 3) throw std::invalid_argument("SmallTorus: side must be at least 3");
    if (n < 1) throw std::invalid_argument("SmallTorus: need at least one component");
    if (static_cast<long>(sites()) * n > 65535) throw std::invalid_argument("SmallTorus: too many field variables");
  }
  int sites() const { return side * side * side * side; }
  int wrap(int a) const { return ((a % side) + side) % side; }
  int min_image(int a) const
  {
    const int r = wrap(a);
    return r > side / 2 ? r - side : r;
  }
  int site(const Point& x) const
  {
    int s = 0;
    for (int d = 0; d < kDim; ++d) s = s * side + wrap(x[d]);
    return s;
  }
  Point coords(int s) const
  {
    Point x{};
    for (int d = kDim - 1; d >= 0; --d) {
      x[d] = min_image(s % side);
      s /= side;
    }
    return x;
  }
  int translate(int s, const Point& by) const
  {
    Point x = coords(s);
    for (int d = 0; d < kDim; ++d) x[d] += by[d];
    return site(x);
  }
  int difference(int a, int b) const
  {
    const Point xa = coords(a), xb = coords(b);
    Point d{};
    for (int k = 0; k < kDim; ++k) d[k] = xa[k] - xb[k];
    return site(d);
  }
  Var var(int s, int comp) const { return static_cast<Var>(s * n + comp); }
  int site_of(Var v) const { return v / n; }
  int comp_of(Var v) const { return v % n; }
};

// Unit steps +-e_k.
inline std::array<Point, 2 * kDim> unit_steps()
{
  std::array<Point, 2 * kDim> e{};
  for (int d = 0; d < kDim; ++d) {
    e[2 * d][d] = 1;
    e[2 * d + 1][d] = -1;
  }
  return e;
}

template <class S>
Polynomial<S> variable(const SmallTorus& T, int s, int comp)
{
  Polynomial<S> p;
  p.add(make_monomial({T.var(s, comp)}), S(1));
  return p;
}

// tau_x = |phi_x|^2 / 2
template <class S>
Polynomial<S> tau(const SmallTorus& T, int x)
{
  Polynomial<S> p;
  for (int i = 0; i < T.n; ++i) p.add(make_monomial({T.var(x, i), T.var(x, i)}), S(1) / S(2));
  return p;
}

// tau_{Delta,x} = phi_x . (-Delta phi)_x / 2
template <class S>
Polynomial<S> tau_delta(const SmallTorus& T, int x)
{
  Polynomial<S> p;
  const S half = S(1) / S(2);
  for (const Point& e : unit_steps()) {
    const int y = T.translate(x, e);
    for (int i = 0; i < T.n; ++i) {
      p.add(make_monomial({T.var(x, i), T.var(x, i)}), half);
      p.add(make_monomial({T.var(x, i), T.var(y, i)}), -half);
    }
  }
  return p;
}

// tau_{nabla nabla,x} = (1/4) sum_{|e|=1} (nabla^e phi_x)^2
template <class S>
Polynomial<S> tau_gradgrad(const SmallTorus& T, int x)
{
  Polynomial<S> p;
  const S q = S(1) / S(4);
  for (const Point& e : unit_steps()) {
    const int y = T.translate(x, e);
    for (int i = 0; i < T.n; ++i) {
      p.add(make_monomial({T.var(y, i), T.var(y, i)}), q);
      p.add(make_monomial({T.var(x, i), T.var(y, i)}), -S(2) * q);
      p.add(make_monomial({T.var(x, i), T.var(x, i)}), q);
    }
  }
  return p;
}

template <class S>
Polynomial<S> tau_squared(const SmallTorus& T, int x)
{
  const Polynomial<S> t = tau<S>(T, x);
  return t * t;
}

// Coefficients of g tau^2 + nu tau + z tau_Delta + y tau_nabla nabla + u.
template <class S>
struct LocalU {
  S g{}, nu{}, z{}, y{}, u{};
};

template <class S>
Polynomial<S> local_polynomial(const SmallTorus& T, int x, const LocalU<S>& U)
{
  Polynomial<S> p(U.u);
  p += U.g * tau_squared<S>(T, x);
  p += U.nu * tau<S>(T, x);
  p += U.z * tau_delta<S>(T, x);
  p += U.y * tau_gradgrad<S>(T, x);
  return p;
}

template <class S>
Polynomial<S> translate(const SmallTorus& T, const Polynomial<S>& p, const Point& by)
{
  Polynomial<S> r;
  std::array<Var, kMaxDegree> buf;
  for (const auto& [m, c] : p.terms()) {
    for (int k = 0; k < m.deg; ++k) buf[k] = T.var(T.translate(T.site_of(m.v[k]), by), T.comp_of(m.v[k]));
    r.add(make_monomial(std::span<const Var>(buf.data(), m.deg)), c);
  }
  return r;
}

template <class S>
Polynomial<S> torus_sum(const SmallTorus& T, const Polynomial<S>& at_origin)
{
  Polynomial<S> r;
  for (int s = 0; s < T.sites(); ++s) r += translate(T, at_origin, T.coords(s));
  return r;
}

// Translation-invariant kernel q(x - y) on the small torus.
template <class S>
struct SmallKernel {
  int side = 5;
  int range = 0;
  std::vector<S> values;  // by site index of the offset
  bool positive = false;

  const S& at(const SmallTorus& T, int a, int b) const { return values[T.difference(a, b)]; }
  S at(const Point& offset) const
  {
    const SmallTorus T(side, 1);
    return values[T.site(offset)];
  }
};

template <class S>
SmallKernel<S> operator+(const SmallKernel<S>& a, const SmallKernel<S>& b)
{
  if (a.side != b.side) throw std::invalid_argument("kernel sum: different tori");
  SmallKernel<S> r = a;
  r.range = std::max(a.range, b.range);
  for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] += b.values[i];
  r.positive = std::all_of(r.values.begin(), r.values.end(), [](const S& v) { return v >= S(0); });
  return r;
}

// Orbit label of an offset under the hyperoctahedral group: sorted |x_k|.
inline Point orbit_key(const Point& x)
{
  Point k{};
  for (int d = 0; d < kDim; ++d) k[d] = std::abs(x[d]);
  std::sort(k.begin(), k.end());
  return k;
}

// Random isotropic kernel with one value per orbit of |x|_inf <= range.
// Rational draws are multiples of 1/64 in [-1/8, 1/8] (origin in [1/16, 3/16]).
template <class S>
SmallKernel<S> random_isotropic_kernel(int side, int range, std::mt19937_64& rng)
{
  if (range < 0 || 2 * range + 1 > side)
    throw std::invalid_argument("random_isotropic_kernel: need 2 range + 1 <= side");
  const SmallTorus T(side, 1);
  std::map<Point, S> orbit_value;
  std::uniform_int_distribution<int> off(-8, 8), mid(4, 12);
  SmallKernel<S> k;
  k.side = side;
  k.range = range;
  k.values.assign(T.sites(), S(0));
  for (int s = 0; s < T.sites(); ++s) {
    const Point x = T.coords(s);
    int r = 0;
    for (int d = 0; d < kDim; ++d) r = std::max(r, std::abs(x[d]));
    if (r > range) continue;
    const Point key = orbit_key(x);
    auto it = orbit_value.find(key);
    if (it == orbit_value.end()) {
      const bool origin = key == Point{0, 0, 0, 0};
      const int numer = origin ? mid(rng) : off(rng);
      S v = S(numer) / S(64);
      if constexpr (std::is_same_v<S, double>) {
        std::uniform_real_distribution<double> jitter(-1.0 / 128.0, 1.0 / 128.0);
        v += jitter(rng);
      }
      it = orbit_value.emplace(key, v).first;
    }
    k.values[s] = it->second;
  }
  k.positive = std::all_of(k.values.begin(), k.values.end(), [](const S& v) { return v >= S(0); });
  return k;
}

template <class S>
SmallKernel<S> kernel_from_grid(const KernelGrid& g)
{
  SmallKernel<S> k;
  k.side = g.side;
  k.range = g.side / 2;
  k.values.assign(g.values.begin(), g.values.end());
  k.positive = std::all_of(k.values.begin(), k.values.end(), [](const S& v) { return v >= S(0); });
  return k;
}

}  // namespace phi4::oracle
