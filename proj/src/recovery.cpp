#include "mixgel/recovery.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <Eigen/Cholesky>

#include "mixgel/rng.hpp"

namespace mixgel {

MeasurementModel gaussian_model(int m, int b, int d, std::uint64_t seed) {
  MixedShape shape(b, d);
  if (m < 1 || m > shape.n())
    throw std::invalid_argument("gaussian_model: need 1 <= m <= b*d");
  MeasurementModel model;
  model.m = m;
  model.n = shape.n();
  model.scale = 1.0 / std::sqrt(static_cast<double>(m));
  model.seed = seed;
  model.matrix.resize(m, model.n);
  Rng rng(seed);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < model.n; ++j)
      model.matrix(i, j) = model.scale * rng.gaussian();
  return model;
}

Eigen::VectorXd flatten(const MixedArray& x) {
  Eigen::VectorXd v(x.size());
  const int d = static_cast<int>(x.cols());
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < d; ++j) v(i * d + j) = x(i, j);
  return v;
}

MixedArray unflatten(const Eigen::VectorXd& v, const MixedShape& shape) {
  if (v.size() != shape.n())
    throw std::invalid_argument("unflatten: size mismatch");
  MixedArray x(shape.b, shape.d);
  for (int i = 0; i < shape.b; ++i)
    for (int j = 0; j < shape.d; ++j) x(i, j) = v(i * shape.d + j);
  return x;
}

namespace {

// prox applied in place to the flat iterate
using ProxFn = std::function<void(Eigen::VectorXd&, double)>;

void prox_entrywise_l1(Eigen::VectorXd& v, double thresh) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v(i)) - thresh;
    v(i) = a > 0.0 ? (v(i) > 0.0 ? a : -a) : 0.0;
  }
}

void prox_group_rows(Eigen::VectorXd& v, int d, double thresh) {
  for (Eigen::Index start = 0; start < v.size(); start += d) {
    auto row = v.segment(start, d);
    const double norm = row.norm();
    if (norm <= thresh)
      row.setZero();
    else
      row *= (1.0 - thresh / norm);
  }
}

// prox of lambda*||u||_1^2 on one row: soft(v, tau) with tau solving
// tau = 2*lambda*||soft(v, tau)||_1 (unique root, bisection).
void prox_l1_squared_row(Eigen::Ref<Eigen::VectorXd> row, double lambda) {
  const double l1 = row.cwiseAbs().sum();
  if (l1 == 0.0) return;
  double lo = 0.0, hi = 2.0 * lambda * l1;
  auto soft_l1 = [&](double tau) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < row.size(); ++j)
      acc += std::max(0.0, std::abs(row(j)) - tau);
    return acc;
  };
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid - 2.0 * lambda * soft_l1(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double tau = 0.5 * (lo + hi);
  for (Eigen::Index j = 0; j < row.size(); ++j) {
    const double a = std::abs(row(j)) - tau;
    row(j) = a > 0.0 ? (row(j) > 0.0 ? a : -a) : 0.0;
  }
}

// Splitting iteration for min f(z) s.t. Az = y: alternate the affine
// projection (cached LLT of A A^T) with the prox of f, consensus ADMM form.
DecodeResult splitting_solve(const MeasurementModel& model,
                             const Eigen::VectorXd& y,
                             const SolverConfig& config, const ProxFn& prox) {
  const auto& A = model.matrix;
  if (y.size() != model.m)
    throw std::invalid_argument("decode: y has wrong length");
  const Eigen::MatrixXd gram = A * A.transpose();
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("decode: A*A^T factorization failed (rank?)");

  auto project = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return v - A.transpose() * llt.solve(A * v - y);
  };

  const Eigen::Index n = model.n;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  const double y_norm = y.norm();

  DecodeResult result;
  for (int it = 1; it <= config.max_iterations; ++it) {
    z = project(w - u);
    Eigen::VectorXd w_prev = std::move(w);
    w = z + u;
    prox(w, config.step);
    u += z - w;

    result.iterations = it;
    const double primal = (z - w).norm();
    const double dual = (w - w_prev).norm();
    const double scale_ref = std::max(1.0, std::max(z.norm(), w.norm()));
    if (primal <= config.stop_tol * scale_ref &&
        dual <= config.stop_tol * std::max(1.0, u.norm())) {
      result.converged = true;
      break;
    }
  }
  // z is the affine-projected iterate; certify feasibility explicitly.
  if ((A * z - y).norm() > config.feasibility_tol * (1.0 + y_norm))
    result.converged = false;
  result.x = std::move(z);
  return result;
}

}  // namespace

DecodeResult decode_group_bp(const MeasurementModel& model,
                             const Eigen::VectorXd& y, const MixedShape& shape,
                             const SolverConfig& config) {
  if (shape.n() != model.n)
    throw std::invalid_argument("decode_group_bp: shape mismatch");
  const int d = shape.d;
  return splitting_solve(model, y, config, [d](Eigen::VectorXd& v, double t) {
    prox_group_rows(v, d, t);
  });
}

DecodeResult decode_bp(const MeasurementModel& model, const Eigen::VectorXd& y,
                       const SolverConfig& config) {
  return splitting_solve(model, y, config, [](Eigen::VectorXd& v, double t) {
    prox_entrywise_l1(v, t);
  });
}

DecodeResult decode_l2l1_bp(const MeasurementModel& model,
                            const Eigen::VectorXd& y, const MixedShape& shape,
                            const SolverConfig& config) {
  if (shape.n() != model.n)
    throw std::invalid_argument("decode_l2l1_bp: shape mismatch");
  const int d = shape.d;
  return splitting_solve(model, y, config, [d](Eigen::VectorXd& v, double t) {
    for (Eigen::Index start = 0; start < v.size(); start += d)
      prox_l1_squared_row(v.segment(start, d), t);
  });
}

DecodeResult decode_block_greedy(const MeasurementModel& model,
                                 const Eigen::VectorXd& y,
                                 const MixedShape& shape, int s,
                                 int iterations, double step) {
  if (shape.n() != model.n)
    throw std::invalid_argument("decode_block_greedy: shape mismatch");
  if (s < 0 || s > shape.b)
    throw std::invalid_argument("decode_block_greedy: s out of range");
  const auto& A = model.matrix;
  if (step <= 0.0) {
    const double ratio = std::sqrt(static_cast<double>(model.n) / model.m);
    step = 1.0 / ((1.0 + ratio) * (1.0 + ratio));
  }
  Eigen::VectorXd z = Eigen::VectorXd::Zero(model.n);
  Eigen::VectorXd best = z;
  double best_residual = y.norm();
  DecodeResult result;
  for (int it = 1; it <= iterations; ++it) {
    const Eigen::VectorXd residual = y - A * z;
    const double res_norm = residual.norm();
    if (res_norm < best_residual) {
      best_residual = res_norm;
      best = z;
      result.iterations = it;
    }
    Eigen::VectorXd grad_step = z + step * (A.transpose() * residual);
    z = flatten(outer_threshold(unflatten(grad_step, shape), s, 2.0));
  }
  const double final_res = (y - A * z).norm();
  if (final_res < best_residual) {
    best_residual = final_res;
    best = z;
    result.iterations = iterations;
  }
  result.x = std::move(best);
  result.converged = true;  // always returns the best iterate
  return result;
}

std::string to_string(SparsityMode mode) {
  switch (mode) {
    case SparsityMode::outer: return "outer";
    case SparsityMode::inner: return "inner";
    case SparsityMode::plain: return "plain";
    case SparsityMode::mixed: return "mixed";
  }
  return "?";
}

std::string to_string(DecoderId id) {
  switch (id) {
    case DecoderId::group_bp: return "group_bp";
    case DecoderId::bp: return "bp";
    case DecoderId::block_greedy: return "block_greedy";
    case DecoderId::l2l1_bp: return "l2l1_bp";
  }
  return "?";
}

SparsityMode sparsity_mode_from_string(const std::string& s) {
  if (s == "outer") return SparsityMode::outer;
  if (s == "inner") return SparsityMode::inner;
  if (s == "plain") return SparsityMode::plain;
  if (s == "mixed") return SparsityMode::mixed;
  throw std::invalid_argument("unknown sparsity mode: " + s);
}

DecoderId decoder_from_string(const std::string& s) {
  if (s == "group_bp") return DecoderId::group_bp;
  if (s == "bp") return DecoderId::bp;
  if (s == "block_greedy") return DecoderId::block_greedy;
  if (s == "l2l1_bp") return DecoderId::l2l1_bp;
  throw std::invalid_argument("unknown decoder: " + s);
}

namespace {

std::vector<int> sample_indices(int n, int k, Rng& rng) {
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < k; ++i) {
    const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(k));
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

MixedArray random_structured_signal(const MixedShape& shape, SparsityMode mode,
                                    int s_or_t, std::uint64_t seed,
                                    bool flat_spectrum) {
  Rng rng(seed);
  MixedArray x = MixedArray::Zero(shape.b, shape.d);
  auto draw = [&]() {
    const double g = rng.gaussian();
    if (!flat_spectrum) return g;
    return g >= 0.0 ? 1.0 : -1.0;
  };
  switch (mode) {
    case SparsityMode::outer: {
      if (s_or_t > shape.b)
        throw std::invalid_argument("signal: s exceeds b");
      for (int i : sample_indices(shape.b, s_or_t, rng))
        for (int j = 0; j < shape.d; ++j) x(i, j) = draw();
      break;
    }
    case SparsityMode::inner: {
      if (s_or_t > shape.d)
        throw std::invalid_argument("signal: t exceeds d");
      for (int i = 0; i < shape.b; ++i)
        for (int j : sample_indices(shape.d, s_or_t, rng)) x(i, j) = draw();
      break;
    }
    case SparsityMode::plain: {
      if (s_or_t > shape.n())
        throw std::invalid_argument("signal: k exceeds n");
      for (int idx : sample_indices(shape.n(), s_or_t, rng))
        x(idx / shape.d, idx % shape.d) = draw();
      break;
    }
    case SparsityMode::mixed: {
      const int s = std::min(s_or_t, shape.b);
      const int t = std::min(s_or_t, shape.d);
      for (int i : sample_indices(shape.b, s, rng))
        for (int j : sample_indices(shape.d, t, rng)) x(i, j) = draw();
      break;
    }
  }
  return x;
}

StabilityRatio stability_ratio(const MixedArray& x, const MixedArray& x_hat,
                               int s_or_t, SparsityMode mode, double tol) {
  if (mode != SparsityMode::outer && mode != SparsityMode::inner)
    throw std::invalid_argument("stability_ratio: mode must be outer|inner");
  const double numerator = (x - x_hat).norm();
  double sigma;
  if (mode == SparsityMode::outer)
    sigma = sigma_outer(x, s_or_t, ExponentPair(1.0, 2.0));
  else
    sigma = sigma_inner(x, s_or_t, ExponentPair(2.0, 1.0));
  const double denom = sigma / std::sqrt(static_cast<double>(s_or_t));
  if (denom == 0.0) {
    if (numerator <= tol) return {StabilityKind::exact_recovery, 0.0};
    return {StabilityKind::infinite,
            std::numeric_limits<double>::infinity()};
  }
  return {StabilityKind::finite, numerator / denom};
}

ExperimentRecord run_trial(const PhaseConfig& config, int s_or_t, int m,
                           std::uint64_t trial_seed) {
  Rng rng(trial_seed);
  const std::uint64_t model_seed = rng.next_u64();
  const std::uint64_t signal_seed = rng.next_u64();
  const MeasurementModel model =
      gaussian_model(m, config.shape.b, config.shape.d, model_seed);
  const MixedArray x =
      random_structured_signal(config.shape, config.mode, s_or_t, signal_seed);
  const Eigen::VectorXd xf = flatten(x);
  const Eigen::VectorXd y = model.matrix * xf;

  DecodeResult decoded;
  switch (config.decoder) {
    case DecoderId::group_bp:
      decoded = decode_group_bp(model, y, config.shape, config.solver);
      break;
    case DecoderId::bp:
      decoded = decode_bp(model, y, config.solver);
      break;
    case DecoderId::l2l1_bp:
      decoded = decode_l2l1_bp(model, y, config.shape, config.solver);
      break;
    case DecoderId::block_greedy:
      decoded = decode_block_greedy(model, y, config.shape, s_or_t);
      break;
  }

  const double x_norm = xf.norm();
  const double rel_err =
      x_norm > 0.0 ? (decoded.x - xf).norm() / x_norm : decoded.x.norm();
  return {config.shape, config.mode,         s_or_t,
          m,            config.decoder,      rel_err,
          decoded.iterations,                trial_seed};
}

std::vector<PhaseCell> phase_transition(const PhaseConfig& config) {
  if (config.sparsity_grid.empty() || config.m_grid.empty())
    throw std::invalid_argument("phase_transition: empty grid");
  if (config.trials < 1)
    throw std::invalid_argument("phase_transition: trials >= 1");

  struct CellTask {
    int sp;
    int m;
    std::size_t cell_index;
  };
  std::vector<CellTask> tasks;
  std::size_t index = 0;
  for (int sp : config.sparsity_grid)
    for (int m : config.m_grid) tasks.push_back({sp, m, index++});

  std::vector<PhaseCell> cells(tasks.size());
  Rng root(config.seed);
  // Per-cell streams are derived from (seed, cell); per-trial from
  // (cell stream, trial). The schedule cannot change the draws.
  std::vector<std::uint64_t> cell_seeds(tasks.size());
  for (std::size_t c = 0; c < tasks.size(); ++c)
    cell_seeds[c] = root.split(static_cast<std::uint64_t>(c)).next_u64();

  auto run_cell = [&](const CellTask& task) {
    PhaseCell cell;
    cell.s_or_t = task.sp;
    cell.m = task.m;
    cell.trials = config.trials;
    Rng cell_rng(cell_seeds[task.cell_index]);
    double err_acc = 0.0;
    int err_count = 0;
    for (int trial = 0; trial < config.trials; ++trial) {
      const std::uint64_t trial_seed =
          cell_rng.split(static_cast<std::uint64_t>(trial)).next_u64();
      try {
        const ExperimentRecord rec =
            run_trial(config, task.sp, task.m, trial_seed);
        if (rec.rel_error <= config.success_threshold) ++cell.successes;
        err_acc += rec.rel_error;
        ++err_count;
      } catch (const std::exception&) {
        ++cell.errors;
      }
    }
    cell.success_rate =
        static_cast<double>(cell.successes) / static_cast<double>(config.trials);
    cell.mean_rel_err = err_count > 0 ? err_acc / err_count
                                      : std::numeric_limits<double>::quiet_NaN();
    cells[task.cell_index] = cell;
  };

  const int threads = std::max(1, config.threads);
  if (threads == 1 || tasks.size() <= 1) {
    for (const auto& task : tasks) run_cell(task);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= tasks.size()) break;
        run_cell(tasks[i]);
      }
    };
    std::vector<std::thread> pool;
    const std::size_t count =
        std::min(static_cast<std::size_t>(threads), tasks.size());
    pool.reserve(count);
    for (std::size_t i = 0; i < count; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return cells;
}

}  // namespace mixgel
