#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mixgel/core_norms.hpp"

namespace mixgel {

/// Family of equal-size subsets of [n] with a certified pairwise
/// intersection cap. Members are sorted index lists.
struct SetFamily {
  int ground_size = 0;       // n
  int member_size = 0;       // 2*ell
  int intersection_cap = 0;  // ell; every pair intersects in < cap elements
  std::vector<std::vector<int>> members;

  std::size_t size() const { return members.size(); }
  /// Re-checks all invariants; throws std::logic_error on violation.
  void verify() const;
};

/// Thrown when a randomized construction exhausts its attempts budget.
/// Carries the best (verified) family found so far; the underlying counting
/// lemma guarantees existence, so this signals a budget, not impossibility.
struct ConstructionError : std::runtime_error {
  SetFamily best;
  ConstructionError(const std::string& what, SetFamily best_family)
      : std::runtime_error(what), best(std::move(best_family)) {}
};

/// Builds >= target_size subsets of [n] of size 2*ell with pairwise
/// intersection < ell by rejection sampling, then verifies exhaustively.
/// target_size <= 0 selects the default ceil((n/(8 ell))^ell).
SetFamily build_set_family(int n, int ell, long target_size = 0,
                           long max_attempts = 0, std::uint64_t seed = 0);

/// Code over the product alphabet [theta]^length with certified minimum
/// Hamming distance.
struct ProductCode {
  int length = 0;         // ell
  int alphabet_size = 0;  // theta
  int min_distance = 0;   // k
  std::vector<std::vector<int>> words;

  std::size_t size() const { return words.size(); }
  /// Gilbert-Varshamov floor theta^ell / sum_{j<k} C(ell,j)(theta-1)^j.
  double gv_lower_bound() const;
  /// Pairwise distances; exhaustive for size <= 10^4, else seeded sample.
  void verify(std::uint64_t sample_seed = 0) const;
};

/// Greedy scan of [theta]^ell in lexicographic order (optionally a seeded
/// shuffle), keeping a word iff it has Hamming distance >= k to all kept
/// words. Maximality of the scan makes the size meet the GV bound.
ProductCode gv_code(int theta, int ell, int k, std::uint64_t seed = 0,
                    bool shuffle = false);

/// One member of a sparse packing: 0/1-valued, rows `rows` (sorted), row
/// rows[i] carrying ones exactly at cols[i] (sorted).
struct SparseBinaryVector {
  std::vector<int> rows;
  std::vector<std::vector<int>> cols;

  MixedArray to_dense(const MixedShape& shape) const;
};

/// Mixed-norm value of a 0/1 vector from its per-row support counts.
double binary_mixed_norm(const std::vector<int>& row_counts,
                         const ExponentPair& e);

/// Mixed-norm distance between two sparse 0/1 vectors.
double binary_distance(const SparseBinaryVector& a, const SparseBinaryVector& b,
                       const ExponentPair& e);

/// Packing of (2s,2t)-sparse 0/1 vectors with certified distance floor and
/// radius cap. Certificates are re-verified on construction.
struct PackingFamily {
  MixedShape shape;
  std::vector<SparseBinaryVector> vectors;
  int outer_s = 0;
  int inner_t = 0;
  ExponentPair radius_in;       // (p,q): radius measured here
  ExponentPair measured_in;     // (r,u): distances measured here
  double radius_cap = 0.0;      // (2s)^{1/p} (2t)^{1/q}
  double distance_floor = 0.0;  // s^{1/r} (2t)^{1/u}
  double cardinality_floor = 0.0;  // (b/32s)^s (d/8t)^{st}
  double min_distance_observed = 0.0;
  double max_radius_observed = 0.0;
  bool exhaustive_certificate = true;

  std::size_t size() const { return vectors.size(); }
  void verify(std::uint64_t sample_seed = 0);
};

/// Three-stage construction: inner set family on [d], Gilbert-Varshamov
/// selection over its 2s-fold product at distance s, outer set family on [b].
PackingFamily build_sparse_packing(int b, int d, int s, int t,
                                   const ExponentPair& norm_in,
                                   const ExponentPair& measured_in,
                                   std::uint64_t seed);

/// Volume-comparison packing cap alpha^n (1+2/eps)^n for subsets of a unit
/// ball with quasi-norm constant alpha.
double volume_packing_cap(int n, double alpha, double eps);

/// Log-packing cap m*log(alpha + 2*c*alpha*radius/eps) under the quotient
/// null-space condition with equivalence constant c.
double quotient_packing_cap(int m, double alpha, double radius, double eps,
                            double c);

/// Specialization used by the Gelfand lower-bound argument: c = alpha*beta.
double gel_est_pack_cap(int m, double alpha, double beta, double radius,
                        double eps);

}  // namespace mixgel
