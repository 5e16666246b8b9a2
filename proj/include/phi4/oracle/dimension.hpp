#pragma once

// Scaling dimension of local field monomials in d = 4 with [phi] = 1.

#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace phi4::oracle {

inline constexpr int kSpaceDim = 4;
inline constexpr int kFieldDim = (kSpaceDim - 2) / 2;

enum class Relevance { relevant, marginal, irrelevant };

inline const char* to_string(Relevance r)
{
  switch (r) {
    case Relevance::relevant: return "relevant";
    case Relevance::marginal: return "marginal";
    case Relevance::irrelevant: return "irrelevant";
  }
  return "?";
}

// One field factor per entry, each carrying its total derivative order |alpha_k|.
struct MonomialDescriptor {
  std::vector<int> derivatives;

  static MonomialDescriptor fields(int count, int derivative_total = 0, int derivative_fields = 0)
  {
    if (count < 0 || derivative_total < 0 || derivative_fields < 0 || derivative_fields > count ||
        (derivative_total > 0 && derivative_fields == 0))
      throw std::invalid_argument("MonomialDescriptor: inconsistent field/derivative counts");
    MonomialDescriptor m;
    m.derivatives.assign(count, 0);
    for (int k = 0; k < derivative_total; ++k) ++m.derivatives[k % derivative_fields];
    return m;
  }
};

struct DimensionReport {
  int dimension = 0;
  Relevance relevance = Relevance::relevant;
};

inline DimensionReport monomial_dimension(const MonomialDescriptor& m)
{
  for (int a : m.derivatives)
    if (a < 0) throw std::invalid_argument("monomial_dimension: negative derivative order");
  DimensionReport r;
  r.dimension = std::accumulate(m.derivatives.begin(), m.derivatives.end(), 0,
                                [](int acc, int a) { return acc + kFieldDim + a; });
  r.relevance = r.dimension < kSpaceDim    ? Relevance::relevant
                : r.dimension == kSpaceDim ? Relevance::marginal
                                           : Relevance::irrelevant;
  return r;
}

// Named monomials of the local coupling space and beyond.
inline MonomialDescriptor named_monomial(const std::string& name)
{
  if (name == "1") return MonomialDescriptor::fields(0);
  if (name == "tau") return MonomialDescriptor::fields(2);
  if (name == "tau^2") return MonomialDescriptor::fields(4);
  if (name == "tau_delta") return MonomialDescriptor{{0, 2}};
  if (name == "tau_gradgrad") return MonomialDescriptor{{1, 1}};
  if (name == "tau^3") return MonomialDescriptor::fields(6);
  throw std::invalid_argument("named_monomial: unknown monomial '" + name + "'");
}

}  // namespace phi4::oracle
