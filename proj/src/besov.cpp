#include "mixgel/besov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mixgel {

namespace {

constexpr double kE = 2.718281828459045235360287471352662498;

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

std::int64_t checked_cast(unsigned __int128 v, const char* msg) {
  if (v > static_cast<unsigned __int128>(INT64_MAX))
    throw std::overflow_error(msg);
  return static_cast<std::int64_t>(v);
}

}  // namespace

double BesovParams::rho() const { return std::min({1.0, p1, q1}); }
double BesovParams::delta_p() const { return 1.0 / p0 - 1.0 / p1; }
double BesovParams::delta_q() const { return 1.0 / q0 - 1.0 / q1; }

std::string to_string(ScheduleVariant v) {
  switch (v) {
    case ScheduleVariant::sharp: return "sharp";
    case ScheduleVariant::general: return "general";
    case ScheduleVariant::endpoint: return "endpoint";
  }
  return "?";
}

ScheduleVariant schedule_variant_from_string(const std::string& s) {
  if (s == "sharp") return ScheduleVariant::sharp;
  if (s == "general") return ScheduleVariant::general;
  if (s == "endpoint") return ScheduleVariant::endpoint;
  throw std::invalid_argument("unknown schedule variant: " + s);
}

std::string to_string(BlockBoundVariant v) {
  switch (v) {
    case BlockBoundVariant::est1: return "est1";
    case BlockBoundVariant::est2: return "est2";
    case BlockBoundVariant::impr: return "impr";
    case BlockBoundVariant::opnorm: return "opnorm";
  }
  return "?";
}

BlockBoundVariant block_variant_from_string(const std::string& s) {
  if (s == "est1") return BlockBoundVariant::est1;
  if (s == "est2") return BlockBoundVariant::est2;
  if (s == "impr") return BlockBoundVariant::impr;
  if (s == "opnorm") return BlockBoundVariant::opnorm;
  throw std::invalid_argument("unknown block bound variant: " + s);
}

std::int64_t layer_multiindex_count(int mu, int d) {
  require(mu >= 0 && d >= 1, "layer_multiindex_count: mu >= 0, d >= 1");
  // C(mu + d - 1, d - 1)
  unsigned __int128 acc = 1;
  for (int i = 1; i <= d - 1; ++i) {
    acc = acc * static_cast<unsigned>(mu + i);
    acc /= static_cast<unsigned>(i);
  }
  return checked_cast(acc, "layer_multiindex_count: overflow");
}

namespace {

// One-dimensional factor #A_j = 2^j + 3; layer dimension by convolution
// over the coordinates.
template <typename Scalar, typename Factor>
Scalar convolve_layers(int mu, int d, const Factor& factor) {
  std::vector<Scalar> cur(static_cast<std::size_t>(mu) + 1);
  for (int j = 0; j <= mu; ++j) cur[static_cast<std::size_t>(j)] = factor(j);
  for (int dim = 2; dim <= d; ++dim) {
    std::vector<Scalar> next(static_cast<std::size_t>(mu) + 1, Scalar(0));
    for (int total = 0; total <= mu; ++total) {
      Scalar acc(0);
      for (int j = 0; j <= total; ++j)
        acc += factor(j) * cur[static_cast<std::size_t>(total - j)];
      next[static_cast<std::size_t>(total)] = acc;
    }
    cur = std::move(next);
  }
  return cur[static_cast<std::size_t>(mu)];
}

}  // namespace

std::int64_t block_dimension(int mu, int d) {
  require(mu >= 0 && d >= 1, "block_dimension: mu >= 0, d >= 1");
  require(mu <= 62, "block_dimension: mu too large");
  const auto result = convolve_layers<unsigned __int128>(mu, d, [](int j) {
    return (static_cast<unsigned __int128>(1) << j) + 3;
  });
  return checked_cast(result, "block_dimension: overflow");
}

double block_dimension_approx(int mu, int d) {
  require(mu >= 0 && d >= 1, "block_dimension_approx: mu >= 0, d >= 1");
  const long double result = convolve_layers<long double>(
      mu, d, [](int j) { return std::exp2(static_cast<long double>(j)) + 3.0L; });
  return static_cast<double>(result);
}

BudgetSchedule budget_schedule(const BesovParams& params, int J,
                               ScheduleVariant variant, double kappa,
                               double beta) {
  require(J >= 2 && J <= 50, "budget_schedule: need 2 <= J <= 50");
  require(params.q0 < params.q1, "budget_schedule: need q0 < q1");
  require(params.p0 <= params.p1, "budget_schedule: need p0 <= p1");
  const double dq = params.delta_q();
  const double dp = params.delta_p();
  const double r = params.r;

  switch (variant) {
    case ScheduleVariant::sharp:
      require(dp == 0.0, "budget_schedule[sharp]: need p0 = p1");
      require(r > 0.0 && r < dq, "budget_schedule[sharp]: need 0 < r < 1/q0-1/q1");
      break;
    case ScheduleVariant::endpoint:
      require(dp == 0.0, "budget_schedule[endpoint]: need p0 = p1");
      require(std::abs(r - dq) < 1e-9,
              "budget_schedule[endpoint]: need r = 1/q0-1/q1");
      break;
    case ScheduleVariant::general:
      require(r > dp && r <= dq + 1e-12,
              "budget_schedule[general]: need 1/p0-1/p1 < r <= 1/q0-1/q1");
      break;
  }

  // At r = delta_q the kappa rule is infeasible and the endpoint middle-range
  // rule m_mu = 2^J mu^{d-1} takes over.
  const bool endpoint_rule =
      variant == ScheduleVariant::endpoint || std::abs(r - dq) < 1e-9;

  if (std::isnan(kappa)) kappa = endpoint_rule ? 1.0 : 0.5 * (r / dq + 1.0);
  if (std::isnan(beta)) beta = dp > 0.0 ? 0.5 * (1.0 + r / dp) : 2.0;
  if (!endpoint_rule) {
    require(kappa < 1.0 && r < kappa * dq,
            "budget_schedule: need r < kappa*(1/q0-1/q1), kappa < 1");
  }
  const bool has_beta_range = variant == ScheduleVariant::general && dp > 0.0;
  if (has_beta_range)
    require(beta > 1.0 && r > beta * dp,
            "budget_schedule: need r > beta*(1/p0-1/p1), beta > 1");

  BudgetSchedule sched;
  sched.J = J;
  sched.kappa = kappa;
  sched.beta = beta;
  sched.variant = variant;
  sched.L = J + static_cast<int>(std::lround((params.d - 1) * std::log2(J)));
  sched.M = has_beta_range
                ? static_cast<int>(std::ceil(sched.L * beta / (beta - 1.0)))
                : sched.L;

  sched.total = 0;
  for (int mu = 0; mu <= sched.M; ++mu) {
    LayerBudget layer;
    layer.mu = mu;
    layer.dim = block_dimension_approx(mu, params.d);
    if (mu <= J) {
      layer.m_mu = 2 * static_cast<std::int64_t>(std::llround(layer.dim));
    } else if (mu <= sched.L) {
      if (endpoint_rule) {
        layer.m_mu = static_cast<std::int64_t>(
            std::llround(std::exp2(J) *
                         std::pow(static_cast<double>(mu), params.d - 1)));
      } else {
        layer.m_mu = static_cast<std::int64_t>(
            std::floor(std::exp2(mu + (sched.L - mu) * kappa)));
      }
    } else {
      layer.m_mu = static_cast<std::int64_t>(
          std::floor(std::exp2(mu + (sched.L - mu) * beta)));
    }
    sched.total += layer.m_mu;
    sched.per_layer.push_back(layer);
  }
  return sched;
}

double block_bound(int mu, std::int64_t m_mu, const BesovParams& params,
                   BlockBoundVariant variant) {
  require(mu >= 0 && m_mu >= 0, "block_bound: mu, m_mu >= 0");
  const double dim = block_dimension_approx(mu, params.d);
  if (static_cast<double>(m_mu) >= dim)
    return 0.0;  // Gelfand index m_mu+1 exceeds the rank

  const double r = params.r;
  const double dp = params.delta_p();
  const double dq = params.delta_q();
  const double opnorm = std::exp2(-(r - dp) * mu);
  if (m_mu == 0) return opnorm;
  const double m = static_cast<double>(m_mu);

  double value = opnorm;
  switch (variant) {
    case BlockBoundVariant::opnorm:
      value = opnorm;
      break;
    case BlockBoundVariant::est1: {
      require(dq > 0.0, "block_bound[est1]: need q0 < q1");
      const double lg = std::max(0.0, std::log(kE * static_cast<double>(dim) / m));
      const double l2v = -r * mu + dq * mu +
                         dq * std::log2(std::min(1.0, lg / m));
      value = std::exp2(l2v);
      break;
    }
    case BlockBoundVariant::est2: {
      const double lg = std::max(0.0, std::log(kE * static_cast<double>(dim) / m));
      const double l2v = -(r - dp) * mu +
                         dp * std::log2(std::min(1.0, lg / m));
      value = std::exp2(l2v);
      break;
    }
    case BlockBoundVariant::impr: {
      require(dq > 0.0, "block_bound[impr]: need q0 < q1");
      require(params.delta_p() == 0.0, "block_bound[impr]: need p0 = p1");
      const double blocks =
          static_cast<double>(layer_multiindex_count(mu, params.d));
      const double inner = std::exp2(mu);
      const double numer = std::max(0.0, std::log(kE * blocks / m) + inner);
      value = std::exp2(-r * mu) *
              std::pow(std::min(1.0, numer / m), dq);
      break;
    }
  }
  return std::min(value, opnorm);
}

double aggregate_bound(const BudgetSchedule& schedule, const BesovParams& params,
                       BlockBoundVariant mid_range_variant) {
  const double rho = params.rho();
  const double tail_exp = params.r - params.delta_p();
  if (tail_exp <= 0.0)
    throw std::invalid_argument(
        "aggregate_bound: operator-norm tail diverges (r <= 1/p0-1/p1)");

  double acc = 0.0;
  for (const auto& layer : schedule.per_layer) {
    BlockBoundVariant variant = mid_range_variant;
    if (layer.mu > schedule.L) variant = BlockBoundVariant::est2;
    acc += std::pow(block_bound(layer.mu, layer.m_mu, params, variant), rho);
  }
  // Exact geometric tail of operator norms beyond M.
  const double ratio = std::exp2(-tail_exp * rho);
  acc += std::pow(ratio, schedule.M + 1) / (1.0 - ratio);
  return std::pow(acc, 1.0 / rho);
}

RateFit fit_line(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3)
    throw std::invalid_argument("fit_line: need >= 3 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(points.size());
  for (const auto& [x, y] : points) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-12 * std::max(1.0, sxx))
    throw std::invalid_argument("fit_line: degenerate x spread");
  RateFit fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double rss = 0.0;
  for (const auto& [x, y] : points) {
    const double e = y - (fit.slope * x + fit.intercept);
    rss += e * e;
  }
  fit.residual = std::sqrt(rss / n);
  fit.points = points;
  return fit;
}

RateFitResult rate_fit(const BesovParams& params, const std::vector<int>& J_range,
                       ScheduleVariant variant, BlockBoundVariant mid_variant,
                       double kappa, double beta) {
  if (J_range.size() < 4)
    throw std::invalid_argument("rate_fit: need >= 4 J values");

  // loglog correction exponent of the variant's upper bound
  double corr_exp = 0.0;
  switch (variant) {
    case ScheduleVariant::sharp:
      corr_exp = 0.0;
      break;
    case ScheduleVariant::endpoint:
      corr_exp = params.r + 1.0 / params.rho();
      break;
    case ScheduleVariant::general:
      corr_exp = params.delta_q();
      if (std::abs(params.r - params.delta_q()) < 1e-9)
        corr_exp += params.r + 1.0 / params.rho();
      break;
  }

  std::vector<std::pair<double, double>> raw, corrected;
  for (int J : J_range) {
    const BudgetSchedule sched =
        budget_schedule(params, J, variant, kappa, beta);
    const double agg = aggregate_bound(sched, params, mid_variant);
    const double lx = std::log(static_cast<double>(sched.total));
    raw.push_back({lx, std::log(agg)});
    if (corr_exp != 0.0) {
      const double corr = std::pow(
          std::log(std::log2(static_cast<double>(sched.total))), corr_exp);
      corrected.push_back({lx, std::log(agg / corr)});
    }
  }

  RateFitResult result;
  result.raw = fit_line(raw);
  if (!corrected.empty()) result.loglog_corrected = fit_line(corrected);
  return result;
}

}  // namespace mixgel
