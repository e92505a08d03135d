#pragma once

#include <optional>
#include <string>
#include <utility>

#include "mixgel/core_norms.hpp"

namespace mixgel {

/// Parameters of a two-sided Gelfand bound evaluation. All absolute constants
/// the theory leaves unnamed are explicit here and default to 1.
struct BoundParams {
  MixedShape shape;
  int m;                 // codimension budget, 1 <= m <= b*d
  ExponentPair source;
  ExponentPair target;
  double constant = 1.0;

  BoundParams(MixedShape sh, int m_, ExponentPair src, ExponentPair dst,
              double c = 1.0)
      : shape(sh), m(m_), source(src), target(dst), constant(c) {
    if (m < 1 || m > shape.n())
      throw std::invalid_argument("BoundParams: m out of range");
    if (!(constant > 0.0))
      throw std::invalid_argument("BoundParams: constant must be positive");
  }
};

enum class RegimeLabel { saturated, outer_dominated, inner_dominated };

std::string to_string(RegimeLabel r);

/// min{1, c*(log(e*b/m)+d)/m}^{1/p-1/q} for 0 < p <= 1, p < q <= 2.
double bound_outer(const BoundParams& params);

/// d = 1 specialization: min{1, c*log(e*n/m)/m}^{1/p-1/q}.
double bound_flat(int m, int n, double p, double q, double constant = 1.0);

/// min{1, c*b*log(e*b*d/m)/m}^{1/q-1/p} for 0 < q <= 1, q <= p <= 2.
double bound_inner(const BoundParams& params);

/// Three-branch mixed bound for 0 < q <= 1, q <= p <= 1, with the branch
/// predicates evaluated directly at the given m and c = params.constant.
/// Returns the branch label alongside the (clamped) value.
std::pair<RegimeLabel, double> bound_mixed(const BoundParams& params);

/// Lower bound c_pq * min{1, (c_p/2)(log(b/m) + d/(8e))/m}^{1/p-1/q},
/// clamped to 0 when log(b/m) + d/(8e) <= 0.
double lower_bound_outer(int m, int b, int d, double p, double q,
                         double c_pq = 1.0, double c_p = 1.0);

/// Checks the inversion implication: if x <= y/(C e log(eK/y)) then
/// y >= (C e/(1+log(C e))) x log(eK/x). Vacuously true when the premise
/// fails; a pure property-test helper.
bool invert_check(double C, double x, double y, double K);

/// Minimum measurement count implied by an outer-sparse stability constant D:
/// (C e/(1+log(C e))) (c^2 s/D^2) log(e D^2 b e^d/(c^2 s)).
/// Empty when s <= D^2/c^2 (the implication carries no content there).
std::optional<double> implied_m_outer(double s, int b, int d, double D,
                                      double c = 1.0, double C = 1.0);

/// Inner-sparse counterpart: b (C e/(1+log(C e))) (c^2 t/D^2)
/// log(e D^2 b d/(c^2 t)). Empty when t <= D^2/c^2.
std::optional<double> implied_m_inner(double t, int b, int d, double D,
                                      double c = 1.0, double C = 1.0);

/// Exact embedding constant kappa = s^{1/p-1/r} t^{1/q-1/u} over the family
/// of (s,t)-sparse supports, for src = (p,q), dst = (r,u) with p <= r, q <= u.
double sharp_embedding_constant(int s, int t, const ExponentPair& src,
                                const ExponentPair& dst);

}  // namespace mixgel
