#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixgel/core_norms.hpp"

namespace mixgel {

/// Gaussian measurement ensemble A = B/sqrt(m), B with i.i.d. N(0,1) entries.
/// Deterministic given the seed; rows are filled row-major.
struct MeasurementModel {
  int m = 0;
  int n = 0;  // = b*d of the signal space
  Eigen::MatrixXd matrix;
  double scale = 0.0;  // 1/sqrt(m)
  std::uint64_t seed = 0;
};

MeasurementModel gaussian_model(int m, int b, int d, std::uint64_t seed);

/// Row-major flattening between b x d arrays and length-n vectors; blocks
/// (rows) stay contiguous.
Eigen::VectorXd flatten(const MixedArray& x);
MixedArray unflatten(const Eigen::VectorXd& v, const MixedShape& shape);

struct SolverConfig {
  double feasibility_tol = 1e-7;
  double stop_tol = 1e-6;
  int max_iterations = 20000;
  double step = 1.0;  // prox scale of the splitting iteration
};

struct DecodeResult {
  Eigen::VectorXd x;  // flat, length n
  bool converged = false;
  int iterations = 0;
};

/// l_1(l_2)-minimization subject to Az = y via operator splitting: affine
/// projection through a cached factorization of A A^T alternated with
/// row-wise group soft-thresholding.
DecodeResult decode_group_bp(const MeasurementModel& model,
                             const Eigen::VectorXd& y, const MixedShape& shape,
                             const SolverConfig& config = {});

/// Plain l_1 basis pursuit (entrywise soft-thresholding).
DecodeResult decode_bp(const MeasurementModel& model, const Eigen::VectorXd& y,
                       const SolverConfig& config = {});

/// l_2(l_1)-minimization: minimizes the equivalent separable objective
/// sum_i ||z_i||_1^2, whose row-wise prox is found by scalar root-finding.
DecodeResult decode_l2l1_bp(const MeasurementModel& model,
                            const Eigen::VectorXd& y, const MixedShape& shape,
                            const SolverConfig& config = {});

/// Iterative hard thresholding onto s-outer-sparse arrays with a fixed step;
/// returns the best iterate by residual. step <= 0 selects 1/(1+sqrt(n/m))^2.
DecodeResult decode_block_greedy(const MeasurementModel& model,
                                 const Eigen::VectorXd& y,
                                 const MixedShape& shape, int s,
                                 int iterations = 600, double step = 0.0);

enum class SparsityMode { outer, inner, plain, mixed };
enum class DecoderId { group_bp, bp, block_greedy, l2l1_bp };

std::string to_string(SparsityMode mode);
std::string to_string(DecoderId id);
SparsityMode sparsity_mode_from_string(const std::string& s);
DecoderId decoder_from_string(const std::string& s);

/// Structured-sparse random signal: support chosen uniformly, values standard
/// Gaussian. flat_spectrum replaces values by unit magnitudes with signs.
MixedArray random_structured_signal(const MixedShape& shape, SparsityMode mode,
                                    int s_or_t, std::uint64_t seed,
                                    bool flat_spectrum = false);

enum class StabilityKind { finite, exact_recovery, infinite };

struct StabilityRatio {
  StabilityKind kind = StabilityKind::finite;
  double value = 0.0;
};

/// ||x - x_hat||_{l2(l2)} / (sigma^{mode}(x) / sqrt(s_or_t)) with the outer
/// error in l1(l2) and the inner error in l2(l1). Zero denominator resolves
/// to the exact-recovery flag when the numerator is below tol, else to the
/// infinite-ratio flag.
StabilityRatio stability_ratio(const MixedArray& x, const MixedArray& x_hat,
                               int s_or_t, SparsityMode mode,
                               double tol = 1e-10);

struct ExperimentRecord {
  MixedShape shape;
  SparsityMode mode;
  int s_or_t = 0;
  int m = 0;
  DecoderId decoder;
  double rel_error = 0.0;
  int iterations = 0;
  std::uint64_t seed = 0;
};

struct PhaseCell {
  int s_or_t = 0;
  int m = 0;
  int trials = 0;
  int successes = 0;
  int errors = 0;  // decoder failures, recorded without aborting the sweep
  double success_rate = 0.0;
  double mean_rel_err = 0.0;
};

struct PhaseConfig {
  MixedShape shape;
  SparsityMode mode = SparsityMode::outer;
  std::vector<int> sparsity_grid;
  std::vector<int> m_grid;
  int trials = 1;
  DecoderId decoder = DecoderId::group_bp;
  std::uint64_t seed = 0;
  double success_threshold = 1e-4;
  SolverConfig solver;
  int threads = 1;
};

/// One decode trial: fresh model and signal from the derived seed.
ExperimentRecord run_trial(const PhaseConfig& config, int s_or_t, int m,
                           std::uint64_t trial_seed);

/// Full sweep over (sparsity, m) cells; deterministic given config.seed
/// regardless of the thread count.
std::vector<PhaseCell> phase_transition(const PhaseConfig& config);

}  // namespace mixgel
