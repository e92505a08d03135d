#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mixgel {

/// Parameters of a sequence-space embedding s^r_{p0,q0}b -> s^0_{p1,q1}b on
/// the unit cube; rho is the aggregation power min{1, p1, q1}.
struct BesovParams {
  int d = 2;
  double r = 0.3;
  double p0 = 2.0, q0 = 1.0;
  double p1 = 2.0, q1 = 2.0;

  double rho() const;
  double delta_p() const;  // 1/p0 - 1/p1
  double delta_q() const;  // 1/q0 - 1/q1
};

enum class ScheduleVariant { sharp, general, endpoint };
std::string to_string(ScheduleVariant v);
ScheduleVariant schedule_variant_from_string(const std::string& s);

/// Number of multi-indices j in N_0^d with ||j||_1 = mu: C(mu+d-1, d-1).
std::int64_t layer_multiindex_count(int mu, int d);

/// Exact layer dimension D_mu = sum over ||j||_1 = mu of prod_i (2^{j_i}+3),
/// from the cube-overlap count on [0,1]^d. Throws on int64 overflow.
std::int64_t block_dimension(int mu, int d);

/// Floating-point evaluation of D_mu for the deep layers a beta-range
/// schedule can reach; agrees with block_dimension wherever that fits.
double block_dimension_approx(int mu, int d);

struct LayerBudget {
  int mu = 0;
  std::int64_t m_mu = 0;
  double dim = 0;  // D_mu; exact below 2^53, floating beyond
};

/// Per-layer codimension allocation realizing the subadditive decomposition.
/// Layers 0..J get 2 D_mu, (J, L] the kappa rule (or the endpoint rule),
/// (L, M] the beta rule (general variant with p0 < p1 only), 0 beyond M.
struct BudgetSchedule {
  int J = 0, L = 0, M = 0;
  double kappa = 0.0, beta = 0.0;
  std::vector<LayerBudget> per_layer;  // mu = 0..M
  std::int64_t total = 0;
  ScheduleVariant variant = ScheduleVariant::sharp;
};

/// kappa/beta are optional; NaN or omitted selects the midpoint defaults
/// kappa = (r/delta_q + 1)/2 and beta = (1 + r/delta_p)/2 (2 when p0 = p1).
BudgetSchedule budget_schedule(const BesovParams& params, int J,
                               ScheduleVariant variant,
                               double kappa = std::nan(""),
                               double beta = std::nan(""));

enum class BlockBoundVariant { est1, est2, impr, opnorm };
std::string to_string(BlockBoundVariant v);
BlockBoundVariant block_variant_from_string(const std::string& s);

/// Gelfand bound for the layer-mu identity at Gelfand index m_mu + 1, with
/// all constants set to 1 and the operator-norm clamp applied. Zero when
/// m_mu >= D_mu (rank), the operator norm when m_mu = 0.
double block_bound(int mu, std::int64_t m_mu, const BesovParams& params,
                   BlockBoundVariant variant);

/// (sum_mu block_bound^rho)^{1/rho} over the schedule plus the closed-form
/// geometric operator-norm tail beyond M. Throws when the tail diverges
/// (r - delta_p <= 0).
double aggregate_bound(const BudgetSchedule& schedule, const BesovParams& params,
                       BlockBoundVariant mid_range_variant);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS of the least-squares fit
  std::vector<std::pair<double, double>> points;  // (log m, log bound)
};

struct RateFitResult {
  RateFit raw;
  std::optional<RateFit> loglog_corrected;
};

/// Pipeline evaluation over a J range followed by a log-log least-squares
/// fit. The corrected fit divides out the variant's loglog factor.
RateFitResult rate_fit(const BesovParams& params, const std::vector<int>& J_range,
                       ScheduleVariant variant, BlockBoundVariant mid_variant,
                       double kappa = std::nan(""), double beta = std::nan(""));

/// Least-squares line through (x, y) points; throws on degenerate x spread.
RateFit fit_line(const std::vector<std::pair<double, double>>& points);

}  // namespace mixgel
