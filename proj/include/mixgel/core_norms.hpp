#pragma once

#include <Eigen/Dense>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

namespace mixgel {

/// Outer/inner exponent pair (p, q) of an l_p^b(l_q^d) space.
/// Either exponent may be +infinity; both must be positive.
struct ExponentPair {
  double p;
  double q;

  ExponentPair(double p_, double q_) : p(p_), q(q_) {
    if (!(p > 0.0) || !(q > 0.0))
      throw std::invalid_argument("ExponentPair: exponents must be positive");
  }
};

/// Shape of the ambient b x d array space; n = b*d.
struct MixedShape {
  int b;
  int d;

  MixedShape(int b_ = 1, int d_ = 1) : b(b_), d(d_) {
    if (b < 1 || d < 1) throw std::invalid_argument("MixedShape: b, d >= 1");
  }
  int n() const { return b * d; }
};

/// A b x d real array; rows are the outer index, columns the inner one.
using MixedArray = Eigen::MatrixXd;

/// Support set inside [b] x [d].
struct SupportPattern {
  std::set<std::pair<int, int>> entries;

  int outer_sparsity() const;  // number of distinct rows
  int inner_sparsity() const;  // max entries per row
};

SupportPattern support_of(const MixedArray& x, double tol = 0.0);

/// 1/e with the convention 1/inf = 0.
inline double inv_exp(double e) { return std::isinf(e) ? 0.0 : 1.0 / e; }

/// l_q norms of the rows of x (sup over the row when q = inf).
Eigen::VectorXd row_norms(const MixedArray& x, double q);

/// Mixed (quasi-)norm: outer l_p norm of the vector of inner row l_q norms.
/// Throws on non-finite entries.
double mixed_norm(const MixedArray& x, const ExponentPair& e);

/// l_p norm of a flat vector, sup-modified at p = inf.
double vector_norm(const Eigen::VectorXd& v, double p);

/// Valid triangle-inequality constant 2^{1/min(p,q,1) - 1} for l_p(l_q).
/// Equals 1 whenever min(p,q) >= 1; not claimed minimal.
double quasi_norm_constant(const ExponentPair& e);

/// Valid constant beta with ||x_S|| + ||x_{S^c}|| <= beta * ||x|| over all
/// complementary splits S. Analytic value clamp(2^{1-1/max(p,q)}, 1, 2); the
/// conservative value 2 is always admissible and is what downstream bounds
/// default to when they take beta as a parameter.
double split_constant(const ExponentPair& e);

/// Keeps the s rows of largest inner l_{inner_q} norm (ties to the lowest
/// row index), zeroes the rest. Result is s-outer sparse.
MixedArray outer_threshold(const MixedArray& x, int s, double inner_q);

/// Keeps, within each row, the t entries of largest magnitude (ties to the
/// lowest column index). Result is t-inner sparse.
MixedArray inner_threshold(const MixedArray& x, int t);

/// Exact best s-outer-sparse approximation error in l_p(l_q).
double sigma_outer(const MixedArray& x, int s, const ExponentPair& e);

/// Exact best t-inner-sparse approximation error in l_p(l_q).
double sigma_inner(const MixedArray& x, int t, const ExponentPair& e);

}  // namespace mixgel
