// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixgel/besov.hpp"
#include "mixgel/bounds.hpp"
#include "mixgel/cli.hpp"
#include "mixgel/core_norms.hpp"
#include "mixgel/packing.hpp"
#include "mixgel/recovery.hpp"
#include "mixgel/rng.hpp"
#include "mixgel/widths.hpp"

using namespace mixgel;
namespace fs = std::filesystem;

namespace {

constexpr double kE = 2.718281828459045;

struct Harness {
  int failures = 0;

  void run(int id, const std::string& name,
           const std::function<std::string()>& body) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = true;
    try {
      detail = body();
    } catch (const std::exception& e) {
      ok = false;
      detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (!ok || detail.rfind("FAIL", 0) == 0) {
      ++failures;
      std::printf("[FAIL] criterion %2d: %-22s (%6.1f s) %s\n", id,
                  name.c_str(), seconds, detail.c_str());
    } else {
      std::printf("[PASS] criterion %2d: %-22s (%6.1f s) %s\n", id,
                  name.c_str(), seconds, detail.c_str());
    }
    std::fflush(stdout);
  }
};

std::string fail(const std::string& why) { return "FAIL: " + why; }

MixedArray random_array(int b, int d, Rng& rng) {
  MixedArray x(b, d);
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = rng.gaussian();
  return x;
}

// ---------------------------------------------------------------- criterion 1

std::vector<std::vector<int>> subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  if (k == 0) {
    out.push_back({});
    return out;
  }
  std::vector<int> cur(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) cur[static_cast<std::size_t>(i)] = i;
  while (true) {
    out.push_back(cur);
    int pos = k - 1;
    while (pos >= 0 && cur[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
    if (pos < 0) break;
    ++cur[static_cast<std::size_t>(pos)];
    for (int i = pos + 1; i < k; ++i)
      cur[static_cast<std::size_t>(i)] = cur[static_cast<std::size_t>(i - 1)] + 1;
  }
  return out;
}

std::string criterion_stechkin() {
  Rng rng(1001);
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<std::pair<double, double>> combos = {
      {0.4, 1.0}, {0.5, 1.0}, {0.5, 2.0}, {0.7, 1.5},
      {1.0, 2.0}, {1.0, inf}, {1.5, 2.0}, {0.4, inf}};
  long checked = 0;
  for (const auto& [lo, hi] : combos) {
    for (int trial = 0; trial < 1000; ++trial) {
      const int b = 2 + static_cast<int>(rng.below(8));
      const int d = 2 + static_cast<int>(rng.below(8));
      MixedArray x = random_array(b, d, rng);
      // outer form: p = lo, r = hi, shared inner exponent q = 2
      const int s = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(b)));
      const double lhs_o = sigma_outer(x, s, ExponentPair(hi, 2.0));
      const double rhs_o = std::pow(s, -(1.0 / lo - inv_exp(hi))) *
                           mixed_norm(x, ExponentPair(lo, 2.0));
      if (lhs_o > rhs_o * (1.0 + 1e-12))
        return fail("Stechkin outer violated");
      // inner form: q = lo, u = hi, shared outer exponent p = 2
      const int t = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(d)));
      const double lhs_i = sigma_inner(x, t, ExponentPair(2.0, hi));
      const double rhs_i = std::pow(t, -(1.0 / lo - inv_exp(hi))) *
                           mixed_norm(x, ExponentPair(2.0, lo));
      if (lhs_i > rhs_i * (1.0 + 1e-12))
        return fail("Stechkin inner violated");
      checked += 2;
    }
  }

  // exactness of the sigma computations against brute force, b,d <= 5
  long double worst = 0.0L;
  for (int draw = 0; draw < 100; ++draw) {
    const int b = 1 + static_cast<int>(rng.below(5));
    const int d = 1 + static_cast<int>(rng.below(5));
    MixedArray x = random_array(b, d, rng);
    const ExponentPair e(draw % 2 == 0 ? 1.0 : 0.5, draw % 3 == 0 ? 2.0 : 1.0);
    for (int s = 0; s <= b; ++s) {
      double brute = std::numeric_limits<double>::infinity();
      for (const auto& keep : subsets(b, s)) {
        MixedArray residual = x;
        for (int i : keep) residual.row(i).setZero();
        brute = std::min(brute, mixed_norm(residual, e));
      }
      worst = std::max<long double>(worst,
                                    std::fabs(sigma_outer(x, s, e) - brute));
    }
    for (int t = 0; t <= d; ++t) {
      MixedArray residual = MixedArray::Zero(b, d);
      for (int i = 0; i < b; ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::vector<int> best_keep;
        for (const auto& keep : subsets(d, t)) {
          MixedArray row = x.row(i);
          for (int j : keep) row(0, j) = 0.0;
          const double val = mixed_norm(row, e);
          if (val < best) {
            best = val;
            best_keep = keep;
          }
        }
        residual.row(i) = x.row(i);
        for (int j : best_keep) residual(i, j) = 0.0;
      }
      worst = std::max<long double>(
          worst, std::fabs(sigma_inner(x, t, e) - mixed_norm(residual, e)));
    }
  }
  if (worst > 1e-12) return fail("sigma exactness drift " + std::to_string((double)worst));
  return "checked " + std::to_string(checked) + " Stechkin instances";
}

// ---------------------------------------------------------------- criterion 2

std::string criterion_packing() {
  const PackingFamily fam = build_sparse_packing(
      64, 64, 2, 2, ExponentPair(1.0, 2.0), ExponentPair(2.0, 2.0), 4242);
  if (fam.size() < 256)
    return fail("cardinality " + std::to_string(fam.size()) + " < 256");
  if (!fam.exhaustive_certificate) return fail("certificate was sampled");
  const double dist_floor = 2.0 * std::sqrt(2.0);
  if (fam.min_distance_observed < dist_floor - 1e-9)
    return fail("distance floor violated");
  if (fam.max_radius_observed > 8.0 + 1e-9) return fail("radius cap violated");
  // independent dense re-check on a slice of pairs
  const MixedShape shape(64, 64);
  Rng rng(900);
  for (int trial = 0; trial < 200; ++trial) {
    const auto i = rng.below(fam.size());
    auto j = rng.below(fam.size() - 1);
    if (j >= i) ++j;
    const MixedArray diff =
        fam.vectors[i].to_dense(shape) - fam.vectors[j].to_dense(shape);
    if (mixed_norm(diff, ExponentPair(2.0, 2.0)) < dist_floor - 1e-9)
      return fail("dense distance re-check violated");
  }
  return "|W| = " + std::to_string(fam.size()) +
         ", min dist = " + format_double(fam.min_distance_observed) +
         ", max radius = " + format_double(fam.max_radius_observed);
}

// ---------------------------------------------------------------- criterion 3

std::string criterion_gv() {
  long combos = 0;
  for (int theta = 2; theta <= 316; ++theta) {
    double space = theta;
    for (int ell = 1; ell <= 17; ++ell, space *= theta) {
      if (space > 1e5) break;
      if (ell == 1 && theta > 64) continue;  // k=1 is the only (trivial) case
      for (int k = 1; k <= ell; ++k) {
        const ProductCode code = gv_code(theta, ell, k);
        if (static_cast<double>(code.size()) < code.gv_lower_bound() - 1e-9)
          return fail("GV bound missed at theta=" + std::to_string(theta) +
                      " ell=" + std::to_string(ell) + " k=" + std::to_string(k));
        ++combos;
      }
    }
  }
  return std::to_string(combos) + " (theta,ell,k) combos";
}

// ---------------------------------------------------------------- criterion 4

std::string criterion_width_sandwich() {
  double fitted = 0.0;
  for (int b : {8, 16, 32}) {
    for (int d : {2, 4, 8}) {
      for (int s : {1, 2, 4}) {
        const std::uint64_t seed =
            static_cast<std::uint64_t>(b * 10000 + d * 100 + s);
        const WidthEstimate mc = width_D(b, d, s, 10000, seed);
        const WidthEstimate direct = width_D_direct(b, d, s, 4000, seed + 1);
        const double upper = width_upper_formula(b, d, s, 1.0);
        fitted = std::max(fitted, mc.mean / upper);
        if (direct.mean < mc.mean - 3.0 * mc.std_error)
          return fail("direct estimate below conv-hull mean at b=" +
                      std::to_string(b) + " d=" + std::to_string(d) +
                      " s=" + std::to_string(s));
        if (direct.mean > 2.0 * mc.mean + 3.0 * mc.std_error)
          return fail("direct estimate above 2x conv-hull mean");
      }
    }
  }
  if (fitted > 3.0)
    return fail("fitted constant " + format_double(fitted) + " > 3");
  return "fitted constant = " + format_double(fitted);
}

// ---------------------------------------------------------------- criterion 5

std::string criterion_sup_oracle() {
  Rng rng(505);
  for (int draw = 0; draw < 100; ++draw) {
    const int b = 2 + static_cast<int>(rng.below(7));
    const int d = 1 + static_cast<int>(rng.below(5));
    MixedArray g = random_array(b, d, rng);
    for (int s = 1; s <= b; ++s) {
      double brute = 0.0;
      for (const auto& keep : subsets(b, s)) {
        double acc = 0.0;
        for (int i : keep) acc += g.row(i).squaredNorm();
        brute = std::max(brute, std::sqrt(acc));
      }
      if (std::abs(sup_outer_sparse(g, s) - brute) > 1e-12)
        return fail("sup mismatch vs enumeration");
    }
  }
  return "100 draws, all s, b <= 8";
}

// ---------------------------------------------------------------- criterion 6

double success_rate(const PhaseConfig& base, int sp, int m) {
  PhaseConfig config = base;
  config.sparsity_grid = {sp};
  config.m_grid = {m};
  return phase_transition(config).front().success_rate;
}

PhaseConfig experiment_config(int b, int d, SparsityMode mode, DecoderId decoder,
                              std::uint64_t seed) {
  PhaseConfig config;
  config.shape = MixedShape(b, d);
  config.mode = mode;
  config.decoder = decoder;
  config.trials = 50;
  config.seed = seed;
  config.solver.max_iterations = 2500;
  config.threads = 4;
  return config;
}

std::string criterion_phase() {
  const int b = 32, d = 8;
  PhaseConfig config =
      experiment_config(b, d, SparsityMode::outer, DecoderId::group_bp, 606);
  std::ostringstream detail;
  for (int s : {1, 2, 4}) {
    const double complexity = s * std::log(kE * b / s) + s * d;
    const int m_hi = std::min(b * d, static_cast<int>(std::lround(3.0 * complexity)));
    const int m_lo = std::max(s + 1,
                              static_cast<int>(std::lround(0.3 * complexity)));
    const double hi_rate = success_rate(config, s, m_hi);
    const double lo_rate = success_rate(config, s, m_lo);
    detail << "s=" << s << ":" << hi_rate << "/" << lo_rate << " ";
    if (hi_rate < 0.9)
      return fail("success " + format_double(hi_rate) + " < 0.9 at m=" +
                  std::to_string(m_hi) + ", s=" + std::to_string(s));
    if (lo_rate > 0.1)
      return fail("success " + format_double(lo_rate) + " > 0.1 at m=" +
                  std::to_string(m_lo) + ", s=" + std::to_string(s));
  }
  return detail.str();
}

// ---------------------------------------------------------------- criterion 7

int locate_m50(const PhaseConfig& base, int sp, int lo, int hi) {
  // smallest lattice m with success >= 0.5 under bisection
  double hi_rate = success_rate(base, sp, hi);
  if (hi_rate < 0.5) return -1;
  while (hi - lo > std::max(1, hi / 64)) {
    const int mid = (lo + hi) / 2;
    if (success_rate(base, sp, mid) >= 0.5)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

std::string criterion_asymmetry() {
  const int d = 16, t = 2;
  std::vector<int> m50_inner;
  for (int b : {16, 32, 64}) {
    PhaseConfig config =
        experiment_config(b, d, SparsityMode::inner, DecoderId::bp, 707);
    const int m50 = locate_m50(config, t, t * b, b * d);
    if (m50 < 0) return fail("no 50% point found for inner b=" + std::to_string(b));
    m50_inner.push_back(m50);
  }
  // linear scaling in b within factor 1.5
  for (std::size_t i = 0; i + 1 < m50_inner.size(); ++i) {
    const double ratio =
        static_cast<double>(m50_inner[i + 1]) / m50_inner[i];
    if (ratio < 2.0 / 1.5 || ratio > 2.0 * 1.5)
      return fail("inner m50 ratio " + format_double(ratio) +
                  " outside [4/3, 3]");
  }

  PhaseConfig outer_config =
      experiment_config(64, d, SparsityMode::outer, DecoderId::group_bp, 708);
  const int m50_outer = locate_m50(outer_config, 2, 3, 64 * d);
  if (m50_outer < 0) return fail("no 50% point found for outer");
  if (m50_outer >= m50_inner.back())
    return fail("outer m50 " + std::to_string(m50_outer) +
                " not below inner m50 " + std::to_string(m50_inner.back()));
  std::ostringstream detail;
  detail << "inner m50 = {" << m50_inner[0] << "," << m50_inner[1] << ","
         << m50_inner[2] << "}, outer m50 = " << m50_outer;
  return detail.str();
}

// ---------------------------------------------------------------- criterion 8

std::string criterion_besov() {
  std::vector<int> J_range;
  for (int J = 8; J <= 18; ++J) J_range.push_back(J);
  BesovParams params;
  params.d = 2;
  params.p0 = params.p1 = 2.0;
  params.q0 = 1.0;
  params.q1 = 2.0;

  params.r = 0.3;
  const double slope03 =
      rate_fit(params, J_range, ScheduleVariant::sharp, BlockBoundVariant::impr)
          .raw.slope;
  if (std::abs(slope03 + 0.3) > 0.05)
    return fail("sharp r=0.3 slope " + format_double(slope03));

  params.r = 0.15;
  const double slope015 =
      rate_fit(params, J_range, ScheduleVariant::sharp, BlockBoundVariant::impr)
          .raw.slope;
  if (std::abs(slope015 + 0.15) > 0.05)
    return fail("sharp r=0.15 slope " + format_double(slope015));

  params.r = 0.5;
  const RateFitResult endpoint = rate_fit(
      params, J_range, ScheduleVariant::endpoint, BlockBoundVariant::impr);
  if (!endpoint.loglog_corrected.has_value())
    return fail("endpoint produced no corrected fit");
  const double corrected = endpoint.loglog_corrected->slope;
  if (std::abs(corrected + 0.5) > 0.05)
    return fail("endpoint corrected slope " + format_double(corrected));
  if (endpoint.raw.slope <= -0.5)
    return fail("endpoint raw slope not shallower than -r");

  std::ostringstream detail;
  detail << "slopes: " << format_double(slope03) << ", "
         << format_double(slope015) << ", corrected " << format_double(corrected);
  return detail.str();
}

// ---------------------------------------------------------------- criterion 9

std::string criterion_bound_crosschecks() {
  // bound_outer at d=1 coincides with bound_flat at n=b
  for (int m = 1; m <= 64; ++m) {
    const double via_outer = bound_outer(BoundParams(
        MixedShape(64, 1), m, ExponentPair(0.7, 2.0), ExponentPair(1.4, 2.0)));
    const double via_flat = bound_flat(m, 64, 0.7, 1.4);
    if (std::abs(via_outer - via_flat) > 1e-14)
      return fail("bound_outer(d=1) != bound_flat at m=" + std::to_string(m));
  }
  // monotone non-increasing in m
  const MixedShape shape(32, 8);
  double prev_o = 2.0, prev_i = 2.0, prev_m = 2.0;
  for (int m = 1; m <= shape.n(); ++m) {
    const double vo = bound_outer(
        BoundParams(shape, m, ExponentPair(1.0, 2.0), ExponentPair(2.0, 2.0)));
    const double vi = bound_inner(
        BoundParams(shape, m, ExponentPair(2.0, 1.0), ExponentPair(2.0, 2.0)));
    const double vm = bound_mixed(BoundParams(shape, m, ExponentPair(1.0, 0.5),
                                              ExponentPair(2.0, 2.0)))
                          .second;
    if (vo > prev_o + 1e-12 || vi > prev_i + 1e-12 || vm > prev_m + 1e-12)
      return fail("monotonicity violated at m=" + std::to_string(m));
    prev_o = vo;
    prev_i = vi;
    prev_m = vm;
  }
  // invert_check on 1e5 admissible samples
  Rng rng(909);
  for (int trial = 0; trial < 100000; ++trial) {
    const double C = 1.0 + 9.0 * rng.uniform();
    const double K = std::exp(rng.uniform() * 12.0);
    const double y = K * std::pow(rng.uniform_pos(), 2.0);
    const double x_max = y / (C * kE * std::log(kE * K / y));
    const double x = x_max * rng.uniform_pos();
    if (!(x > 0.0)) continue;
    if (!invert_check(C, x, y, K)) return fail("invert_check returned false");
  }
  // Gaussian norm mean bracket up to 1e6
  for (std::int64_t m = 1; m <= 1000000; ++m) {
    const double em = gaussian_norm_mean(m);
    if (!(em >= m / std::sqrt(m + 1.0) && em <= std::sqrt((double)m)))
      return fail("E_m bracket violated at m=" + std::to_string(m));
  }
  return "identity, monotonicity, 1e5 inversions, bracket to 1e6";
}

// --------------------------------------------------------------- criterion 10

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string criterion_determinism(const std::string& cli_path) {
  const fs::path dir =
      fs::temp_directory_path() / ("mixgel_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string cfg = (dir / "phase.json").string();
  {
    std::ofstream out(cfg);
    out << R"({"subcommand":"phase","seed":99,"params":{"b":16,"d":4,)"
        << R"("mode":"outer","sparsity":[1,2],"m":[8,24,48,64],"trials":8,)"
        << R"("decoder":"group_bp"}})";
  }
  std::vector<std::string> outputs;
  for (int run = 0; run < 3; ++run) {
    const std::string out =
        (dir / ("out" + std::to_string(run) + ".csv")).string();
    const int threads = run == 2 ? 4 : 1;
    if (!cli_path.empty()) {
      std::ostringstream cmd;
      cmd << cli_path << " --config " << cfg << " --out " << out
          << " --threads " << threads;
      if (std::system(cmd.str().c_str()) != 0)
        return fail("CLI run failed: " + cmd.str());
    } else {
      RunConfig config = load_config(cfg, out, "csv", -1, threads);
      if (dispatch(config) != kOk) return fail("dispatch failed");
    }
    outputs.push_back(slurp(out));
    if (outputs.back().empty()) return fail("empty output");
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  if (outputs[0] != outputs[1]) return fail("repeat run differs");
  if (outputs[0] != outputs[2]) return fail("threaded run differs");
  return cli_path.empty() ? "library dispatch, 3 runs byte-identical"
                          : "CLI binary, 3 runs byte-identical";
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli_path;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--cli") cli_path = argv[i + 1];

  Harness harness;
  harness.run(1, "stechkin suite", criterion_stechkin);
  harness.run(2, "packing certificates", criterion_packing);
  harness.run(3, "gv sweep", criterion_gv);
  harness.run(4, "width sandwich", criterion_width_sandwich);
  harness.run(5, "exact sup oracle", criterion_sup_oracle);
  harness.run(6, "recovery phase", criterion_phase);
  harness.run(7, "asymmetry", criterion_asymmetry);
  harness.run(8, "besov sharp rate", criterion_besov);
  harness.run(9, "bound cross-checks", criterion_bound_crosschecks);
  harness.run(10, "determinism", [&] { return criterion_determinism(cli_path); });

  if (harness.failures > 0) {
    std::printf("%d criterion(s) failed\n", harness.failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
