#include "mixgel/widths.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mixgel/rng.hpp"

namespace mixgel {

namespace {

constexpr double kE = 2.718281828459045235360287471352662498;

// Deterministic pairwise sum; the result does not depend on how values were
// produced, only on their order in the buffer.
double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += v[i];
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

WidthEstimate summarize(const std::vector<double>& values, std::uint64_t seed) {
  WidthEstimate est;
  est.trials = static_cast<std::int64_t>(values.size());
  est.seed = seed;
  est.mean = pairwise_sum(values.data(), values.size()) /
             static_cast<double>(values.size());
  if (values.size() < 2) {
    est.std_error = std::numeric_limits<double>::quiet_NaN();
    return est;
  }
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double dev = values[i] - est.mean;
    sq[i] = dev * dev;
  }
  const double var = pairwise_sum(sq.data(), sq.size()) /
                     static_cast<double>(values.size() - 1);
  est.std_error = std::sqrt(var / static_cast<double>(values.size()));
  return est;
}

MixedArray gaussian_array(int b, int d, Rng& rng) {
  MixedArray g(b, d);
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.gaussian();
  return g;
}

}  // namespace

GaussianNormTable::GaussianNormTable(int max_m) {
  if (max_m < 1) throw std::invalid_argument("GaussianNormTable: max_m >= 1");
  values_.resize(static_cast<std::size_t>(max_m));
  for (int m = 1; m <= max_m; ++m) {
    const double em = gaussian_norm_mean(m);
    const double lo = m / std::sqrt(m + 1.0);
    const double hi = std::sqrt(static_cast<double>(m));
    if (!(lo <= em && em <= hi))
      throw std::logic_error("GaussianNormTable: bracket violated");
    values_[static_cast<std::size_t>(m) - 1] = em;
  }
}

double sup_outer_sparse(const MixedArray& g, int s) {
  const int b = static_cast<int>(g.rows());
  if (s < 1 || s > b)
    throw std::invalid_argument("sup_outer_sparse: s out of range");
  std::vector<double> sq(static_cast<std::size_t>(b));
  for (int i = 0; i < b; ++i) sq[static_cast<std::size_t>(i)] = g.row(i).squaredNorm();
  std::nth_element(sq.begin(), sq.begin() + (b - s), sq.end());
  double acc = 0.0;
  for (int i = b - s; i < b; ++i) acc += sq[static_cast<std::size_t>(i)];
  return std::sqrt(acc);
}

WidthEstimate width_D(int b, int d, int s, int trials, std::uint64_t seed) {
  if (s < 1 || s > b) throw std::invalid_argument("width_D: s out of range");
  if (trials < 1) throw std::invalid_argument("width_D: trials >= 1");
  Rng root(seed);
  std::vector<double> values(static_cast<std::size_t>(trials));
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng = root.split(static_cast<std::uint64_t>(trial));
    values[static_cast<std::size_t>(trial)] =
        sup_outer_sparse(gaussian_array(b, d, rng), s);
  }
  return summarize(values, seed);
}

double sup_over_D(const MixedArray& g, int s) {
  const int b = static_cast<int>(g.rows());
  if (s < 1 || s > b) throw std::invalid_argument("sup_over_D: s out of range");
  // max <c,lambda> s.t. ||lambda||_1 <= sqrt(s), ||lambda||_2 <= 1,
  // lambda >= 0, where c holds the row l_2 norms of g. Optimal lambda is
  // (c - tau)_+ rescaled to the l_2 sphere, tau fixed by the l_1 constraint.
  Eigen::VectorXd c(b);
  for (int i = 0; i < b; ++i) c(i) = g.row(i).norm();
  const double c2 = c.norm();
  if (c2 == 0.0) return 0.0;
  const double sqrt_s = std::sqrt(static_cast<double>(s));
  if (c.sum() / c2 <= sqrt_s) return c2;

  auto ratio = [&](double tau) {
    double l1 = 0.0, l2sq = 0.0;
    for (int i = 0; i < b; ++i) {
      const double v = c(i) - tau;
      if (v > 0.0) {
        l1 += v;
        l2sq += v * v;
      }
    }
    return l1 / std::sqrt(l2sq);
  };

  double lo = 0.0, hi = c.maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ratio(mid) > sqrt_s)
      lo = mid;
    else
      hi = mid;
  }
  const double tau = 0.5 * (lo + hi);
  double l2sq = 0.0, dot = 0.0;
  for (int i = 0; i < b; ++i) {
    const double v = c(i) - tau;
    if (v > 0.0) {
      l2sq += v * v;
      dot += c(i) * v;
    }
  }
  if (!(l2sq > 0.0)) {
    // exact ties at the row-norm maximum (measure zero for Gaussian input);
    // the conv(L) value is a valid feasible fallback
    return sup_outer_sparse(g, s);
  }
  return dot / std::sqrt(l2sq);
}

WidthEstimate width_D_direct(int b, int d, int s, int trials,
                             std::uint64_t seed) {
  if (s < 1 || s > b)
    throw std::invalid_argument("width_D_direct: s out of range");
  if (trials < 1) throw std::invalid_argument("width_D_direct: trials >= 1");
  Rng root(seed);
  std::vector<double> values(static_cast<std::size_t>(trials));
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng = root.split(static_cast<std::uint64_t>(trial));
    values[static_cast<std::size_t>(trial)] =
        sup_over_D(gaussian_array(b, d, rng), s);
  }
  return summarize(values, seed);
}

double width_upper_formula(int b, int d, int s, double constant) {
  if (s < 1 || s > b)
    throw std::invalid_argument("width_upper_formula: s out of range");
  const double sd = static_cast<double>(s);
  return constant *
         (std::sqrt(sd * std::log(kE * b / sd)) + std::sqrt(sd * d));
}

std::pair<double, double> interpolation_exponents(double p, double q) {
  if (!(p > 0.0 && p <= 1.0 && q > p && q <= 2.0))
    throw std::invalid_argument(
        "interpolation_exponents: need 0 < p <= 1, p < q <= 2");
  const double denom = 1.0 / p - 0.5;
  const double theta = (1.0 / q - 0.5) / denom;
  const double eta = 0.5 / denom;
  return {theta, eta};
}

double gaussian_norm_mean(std::int64_t m) {
  if (m < 1) throw std::invalid_argument("gaussian_norm_mean: m >= 1");
  const double md = static_cast<double>(m);
  return std::sqrt(2.0) *
         std::exp(std::lgamma((md + 1.0) / 2.0) - std::lgamma(md / 2.0));
}

double escape_margin(std::int64_t m, double width, double t) {
  if (m < 1 || width < 0.0 || !(t > 0.0))
    throw std::invalid_argument("escape_margin: bad parameters");
  return gaussian_norm_mean(m) - width - t;
}

double rho_threshold(int s, double p, double q) {
  if (s < 1) throw std::invalid_argument("rho_threshold: s >= 1");
  if (!(p > 0.0 && q >= p))
    throw std::invalid_argument("rho_threshold: need 0 < p <= q");
  return std::pow(static_cast<double>(s), -(1.0 / p - 1.0 / q));
}

}  // namespace mixgel
