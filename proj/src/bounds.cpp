#include "mixgel/bounds.hpp"

#include <algorithm>
#include <cmath>

namespace mixgel {

std::string to_string(RegimeLabel r) {
  switch (r) {
    case RegimeLabel::saturated: return "saturated";
    case RegimeLabel::outer_dominated: return "outer-dominated";
    case RegimeLabel::inner_dominated: return "inner-dominated";
  }
  return "?";
}

namespace {

constexpr double kE = 2.718281828459045235360287471352662498;

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

double bound_outer(const BoundParams& params) {
  const double p = params.source.p, q = params.target.p;
  require(p > 0.0 && p <= 1.0, "bound_outer: need 0 < p <= 1");
  require(q > p && q <= 2.0, "bound_outer: need p < q <= 2");
  const int b = params.shape.b, d = params.shape.d, m = params.m;
  // At d = 1 the inner space is scalar and the block term drops, so the
  // evaluator coincides with bound_flat at n = b exactly.
  const double block_term = d == 1 ? 0.0 : static_cast<double>(d);
  const double arg = params.constant * (std::log(kE * b / m) + block_term) /
                     static_cast<double>(m);
  return std::pow(std::min(1.0, arg), 1.0 / p - 1.0 / q);
}

double bound_flat(int m, int n, double p, double q, double constant) {
  require(p > 0.0 && p <= 1.0, "bound_flat: need 0 < p <= 1");
  require(q > p && q <= 2.0, "bound_flat: need p < q <= 2");
  require(m >= 1 && m <= n, "bound_flat: need 1 <= m <= n");
  const double arg = constant * std::log(kE * n / m) / static_cast<double>(m);
  return std::pow(std::min(1.0, arg), 1.0 / p - 1.0 / q);
}

double bound_inner(const BoundParams& params) {
  const double q = params.source.q, p = params.source.p;
  require(q > 0.0 && q <= 1.0, "bound_inner: need 0 < q <= 1");
  require(p >= q && p <= 2.0, "bound_inner: need q <= p <= 2");
  const int b = params.shape.b, m = params.m;
  const double n = static_cast<double>(params.shape.n());
  const double arg = params.constant * b * std::log(kE * n / m) / params.m;
  return std::pow(std::min(1.0, arg), 1.0 / q - 1.0 / p);
}

std::pair<RegimeLabel, double> bound_mixed(const BoundParams& params) {
  const double p = params.source.p, q = params.source.q;
  require(q > 0.0 && q <= 1.0, "bound_mixed: need 0 < q <= 1");
  require(p >= q && p <= 1.0, "bound_mixed: need q <= p <= 1");
  const double b = params.shape.b;
  const double m = params.m;
  const double c = params.constant;
  const double lg = std::log(kE * params.shape.n() / m);

  // Branch predicates evaluated directly at m (regime boundaries are fuzzy
  // bands, not lines; margins pick the nearest branch if none holds).
  const double sat_margin = c * lg - m;
  const double mid_margin = std::min(m - c * lg, c * b * lg - m);
  const double inner_margin = m - c * b * lg;

  RegimeLabel label;
  if (sat_margin >= 0.0 && sat_margin >= mid_margin &&
      sat_margin >= inner_margin) {
    label = RegimeLabel::saturated;
  } else if (mid_margin >= 0.0 && mid_margin >= inner_margin) {
    label = RegimeLabel::outer_dominated;
  } else if (inner_margin >= 0.0) {
    label = RegimeLabel::inner_dominated;
  } else {
    // No predicate holds exactly; fall back to the largest margin.
    label = RegimeLabel::saturated;
    double best = sat_margin;
    if (mid_margin > best) { best = mid_margin; label = RegimeLabel::outer_dominated; }
    if (inner_margin > best) { label = RegimeLabel::inner_dominated; }
  }

  double value = 1.0;
  switch (label) {
    case RegimeLabel::saturated:
      value = 1.0;
      break;
    case RegimeLabel::outer_dominated:
      value = std::pow(lg / m, 1.0 / p - 0.5);
      break;
    case RegimeLabel::inner_dominated:
      value = std::pow(b, 0.5 - 1.0 / p) * std::pow(b * lg / m, 1.0 / q - 0.5);
      break;
  }
  return {label, std::min(1.0, value)};
}

double lower_bound_outer(int m, int b, int d, double p, double q, double c_pq,
                         double c_p) {
  require(p > 0.0 && q > p && q <= 2.0, "lower_bound_outer: need 0 < p < q <= 2");
  require(d >= 1 && b >= 1, "lower_bound_outer: need b, d >= 1");
  require(m >= 1 && m <= b * d, "lower_bound_outer: need 1 <= m <= bd");
  const double core = std::log(static_cast<double>(b) / m) + d / (8.0 * kE);
  if (core <= 0.0) return 0.0;
  const double arg = 0.5 * c_p * core / m;
  return c_pq * std::pow(std::min(1.0, arg), 1.0 / p - 1.0 / q);
}

bool invert_check(double C, double x, double y, double K) {
  require(C >= 1.0, "invert_check: need C >= 1");
  require(x > 0.0, "invert_check: need x > 0");
  require(y > 0.0 && y <= K, "invert_check: need 0 < y <= K");
  const bool premise = x <= y / (C * kE * std::log(kE * K / y));
  if (!premise) return true;
  const double rhs = (C * kE / (1.0 + std::log(C * kE))) * x * std::log(kE * K / x);
  return y >= rhs;
}

namespace {

double invert_prefactor(double C) {
  return C * kE / (1.0 + std::log(C * kE));
}

}  // namespace

std::optional<double> implied_m_outer(double s, int b, int d, double D,
                                      double c, double C) {
  require(s > 0 && b >= 1 && d >= 1, "implied_m_outer: bad sizes");
  require(D > 0.0 && c > 0.0 && C >= 1.0, "implied_m_outer: bad constants");
  const double xval = c * c * s / (D * D);
  if (xval <= 1.0) return std::nullopt;  // s <= D^2/c^2: no implication
  // log(e D^2 b e^d / (c^2 s)) assembled in log space to dodge e^d overflow.
  const double lg = 1.0 + d + std::log(D * D * b / (c * c * s));
  return invert_prefactor(C) * xval * lg;
}

std::optional<double> implied_m_inner(double t, int b, int d, double D,
                                      double c, double C) {
  require(t > 0 && b >= 1 && d >= 1, "implied_m_inner: bad sizes");
  require(D > 0.0 && c > 0.0 && C >= 1.0, "implied_m_inner: bad constants");
  const double xval = c * c * t / (D * D);
  if (xval <= 1.0) return std::nullopt;
  const double lg = std::log(kE * D * D * b * d / (c * c * t));
  return b * invert_prefactor(C) * xval * lg;
}

double sharp_embedding_constant(int s, int t, const ExponentPair& src,
                                const ExponentPair& dst) {
  require(s >= 1 && t >= 1, "sharp_embedding_constant: need s, t >= 1");
  require(src.p <= dst.p && src.q <= dst.q,
          "sharp_embedding_constant: need src.p <= dst.p, src.q <= dst.q");
  const double outer = inv_exp(src.p) - inv_exp(dst.p);
  const double inner = inv_exp(src.q) - inv_exp(dst.q);
  return std::pow(s, outer) * std::pow(t, inner);
}

}  // namespace mixgel
