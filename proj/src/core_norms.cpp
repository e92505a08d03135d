#include "mixgel/core_norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace mixgel {

int SupportPattern::outer_sparsity() const {
  std::set<int> rows;
  for (const auto& [i, j] : entries) rows.insert(i);
  return static_cast<int>(rows.size());
}

int SupportPattern::inner_sparsity() const {
  int max_count = 0;
  int last_row = -1;
  int count = 0;
  for (const auto& [i, j] : entries) {
    if (i != last_row) {
      last_row = i;
      count = 0;
    }
    max_count = std::max(max_count, ++count);
  }
  return max_count;
}

SupportPattern support_of(const MixedArray& x, double tol) {
  SupportPattern s;
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j)
      if (std::abs(x(i, j)) > tol) s.entries.insert({i, j});
  return s;
}

namespace {

void require_finite(const MixedArray& x) {
  if (!x.allFinite())
    throw std::invalid_argument("MixedArray: entries must be finite");
}

// Scaled power sum: M * (sum (|v_i|/M)^p)^{1/p} with M = max|v_i|.
double lp_norm(const double* v, Eigen::Index n, double p) {
  if (n == 0) return 0.0;
  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(v[i]));
  if (scale == 0.0) return 0.0;
  if (std::isinf(p)) return scale;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = std::abs(v[i]) / scale;
    if (r > 0.0) acc += std::pow(r, p);
  }
  return scale * std::pow(acc, 1.0 / p);
}

}  // namespace

Eigen::VectorXd row_norms(const MixedArray& x, double q) {
  Eigen::VectorXd out(x.rows());
  std::vector<double> buf(static_cast<size_t>(x.cols()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) buf[static_cast<size_t>(j)] = x(i, j);
    out(i) = lp_norm(buf.data(), x.cols(), q);
  }
  return out;
}

double vector_norm(const Eigen::VectorXd& v, double p) {
  return lp_norm(v.data(), v.size(), p);
}

double mixed_norm(const MixedArray& x, const ExponentPair& e) {
  require_finite(x);
  const Eigen::VectorXd rn = row_norms(x, e.q);
  return vector_norm(rn, e.p);
}

double quasi_norm_constant(const ExponentPair& e) {
  const double rho = std::min({e.p, e.q, 1.0});
  return std::pow(2.0, 1.0 / rho - 1.0);
}

double split_constant(const ExponentPair& e) {
  const double mx = std::max(e.p, e.q);
  const double value = std::isinf(mx) ? 2.0 : std::pow(2.0, 1.0 - 1.0 / mx);
  return std::clamp(value, 1.0, 2.0);
}

namespace {

// Indices of the k largest values, ties broken by the lowest index.
std::vector<int> top_k_indices(const Eigen::VectorXd& v, int k) {
  std::vector<int> idx(static_cast<size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return v(a) > v(b); });
  idx.resize(static_cast<size_t>(k));
  return idx;
}

}  // namespace

MixedArray outer_threshold(const MixedArray& x, int s, double inner_q) {
  require_finite(x);
  const int b = static_cast<int>(x.rows());
  if (s < 0 || s > b)
    throw std::invalid_argument("outer_threshold: s out of range");
  if (s == b) return x;
  MixedArray out = MixedArray::Zero(x.rows(), x.cols());
  if (s == 0) return out;
  const Eigen::VectorXd rn = row_norms(x, inner_q);
  for (int i : top_k_indices(rn, s)) out.row(i) = x.row(i);
  return out;
}

MixedArray inner_threshold(const MixedArray& x, int t) {
  require_finite(x);
  const int d = static_cast<int>(x.cols());
  if (t < 0 || t > d)
    throw std::invalid_argument("inner_threshold: t out of range");
  if (t == d) return x;
  MixedArray out = MixedArray::Zero(x.rows(), x.cols());
  if (t == 0) return out;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Eigen::VectorXd mags = x.row(i).cwiseAbs().transpose();
    for (int j : top_k_indices(mags, t)) out(i, j) = x(i, j);
  }
  return out;
}

double sigma_outer(const MixedArray& x, int s, const ExponentPair& e) {
  require_finite(x);
  const int b = static_cast<int>(x.rows());
  if (s < 0 || s > b) throw std::invalid_argument("sigma_outer: s out of range");
  // Dropping the s rows of largest l_q norm is exact: the residual norm is a
  // monotone function of the surviving row norms.
  const Eigen::VectorXd rn = row_norms(x, e.q);
  std::vector<int> idx(static_cast<size_t>(b));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int c) { return rn(a) > rn(c); });
  Eigen::VectorXd rest(b - s);
  for (int i = s; i < b; ++i) rest(i - s) = rn(idx[static_cast<size_t>(i)]);
  return vector_norm(rest, e.p);
}

double sigma_inner(const MixedArray& x, int t, const ExponentPair& e) {
  require_finite(x);
  const int d = static_cast<int>(x.cols());
  if (t < 0 || t > d) throw std::invalid_argument("sigma_inner: t out of range");
  // Per-row magnitude thresholding is exact: the mixed norm is entrywise
  // monotone, so each row's residual can be minimized independently.
  const MixedArray residual = x - inner_threshold(x, t);
  const Eigen::VectorXd rn = row_norms(residual, e.q);
  return vector_norm(rn, e.p);
}

}  // namespace mixgel
