#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mixgel/core_norms.hpp"

namespace mixgel {

/// Monte Carlo estimate of a Gaussian width. std_error is NaN when a single
/// trial makes it undefined.
struct WidthEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
};

/// Table of Gaussian norm means E_m = E||g||_2, g ~ N(0, I_m), for
/// m = 1..max_m. Construction checks the bracket m/sqrt(m+1) <= E_m <= sqrt(m).
class GaussianNormTable {
 public:
  explicit GaussianNormTable(int max_m);
  double operator[](int m) const { return values_.at(static_cast<std::size_t>(m) - 1); }
  int max_m() const { return static_cast<int>(values_.size()); }

 private:
  std::vector<double> values_;
};

/// sup over s-outer-sparse unit-ball matrices of <g, x>: the square root of
/// the sum of the s largest squared row l_2 norms of g. Exact.
double sup_outer_sparse(const MixedArray& g, int s);

/// Monte Carlo mean of sup_outer_sparse over standard Gaussian draws; equals
/// the width of conv(L_{b,d,s}), and brackets w(D_{b,d,s}) in [mean, 2 mean].
WidthEstimate width_D(int b, int d, int s, int trials, std::uint64_t seed);

/// Per-draw exact supremum over D_{b,d,s} = {||x||_{l1(l2)} <= sqrt(s),
/// ||x||_2 <= 1}, reduced to a b-dimensional water-filling problem.
double sup_over_D(const MixedArray& g, int s);

/// Monte Carlo mean of sup_over_D: a direct estimate of w(D_{b,d,s}).
WidthEstimate width_D_direct(int b, int d, int s, int trials,
                             std::uint64_t seed);

/// Closed-form upper envelope constant*(sqrt(s log(e b/s)) + sqrt(s d)).
double width_upper_formula(int b, int d, int s, double constant = 1.0);

/// (theta, eta) with 1/q = theta/p + (1-theta)/2 and 1 = eta/p + (1-eta)/2;
/// both lie in [0,1] for 0 < p <= 1 < ... q <= 2.
std::pair<double, double> interpolation_exponents(double p, double q);

/// E_m = sqrt(2) Gamma((m+1)/2) / Gamma(m/2), evaluated in the log domain.
double gaussian_norm_mean(std::int64_t m);

/// Escape certificate margin E_m - width - t; a positive value certifies the
/// escape event with probability >= 1 - exp(-t^2/2).
double escape_margin(std::int64_t m, double width, double t);

/// rho = s^{-(1/p-1/q)}: the norm level below which unit-ball vectors are
/// captured by D_{b,d,s} after l_2 normalization.
double rho_threshold(int s, double p, double q);

}  // namespace mixgel
