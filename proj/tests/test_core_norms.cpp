#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "mixgel/core_norms.hpp"
#include "mixgel/rng.hpp"

using namespace mixgel;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Independent oracle: naive double-loop summation at extended precision.
double naive_mixed_norm(const MixedArray& x, double p, double q) {
  const int b = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  long double outer_acc = 0.0L;
  long double outer_sup = 0.0L;
  for (int i = 0; i < b; ++i) {
    long double rn;
    if (std::isinf(q)) {
      rn = 0.0L;
      for (int j = 0; j < d; ++j)
        rn = std::max<long double>(rn, fabsl(static_cast<long double>(x(i, j))));
    } else {
      long double acc = 0.0L;
      for (int j = 0; j < d; ++j)
        acc += powl(fabsl(static_cast<long double>(x(i, j))),
                    static_cast<long double>(q));
      rn = powl(acc, 1.0L / static_cast<long double>(q));
    }
    if (std::isinf(p))
      outer_sup = std::max(outer_sup, rn);
    else
      outer_acc += powl(rn, static_cast<long double>(p));
  }
  if (std::isinf(p)) return static_cast<double>(outer_sup);
  return static_cast<double>(powl(outer_acc, 1.0L / static_cast<long double>(p)));
}

MixedArray random_array(int b, int d, Rng& rng) {
  MixedArray x(b, d);
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = rng.gaussian();
  return x;
}

// All k-subsets of [n] in lexicographic order.
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

// Brute-force best s-outer-sparse approximation over all row supports.
double brute_sigma_outer(const MixedArray& x, int s, double p, double q) {
  const int b = static_cast<int>(x.rows());
  double best = std::numeric_limits<double>::infinity();
  for (const auto& keep : subsets(b, s)) {
    MixedArray residual = x;
    for (int i : keep) residual.row(i).setZero();
    best = std::min(best, naive_mixed_norm(residual, p, q));
  }
  return best;
}

// Brute-force best t-inner-sparse approximation: per-row enumeration of all
// column supports of size t.
double brute_sigma_inner(const MixedArray& x, int t, double p, double q) {
  const int b = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  MixedArray residual = MixedArray::Zero(b, d);
  const auto supports = subsets(d, t);
  for (int i = 0; i < b; ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_keep;
    for (const auto& keep : supports) {
      MixedArray row = x.row(i);
      for (int j : keep) row(0, j) = 0.0;
      const double val = naive_mixed_norm(row, p, q);
      if (val < best) {
        best = val;
        best_keep = keep;
      }
    }
    residual.row(i) = x.row(i);
    for (int j : best_keep) residual(i, j) = 0.0;
  }
  return naive_mixed_norm(residual, p, q);
}

const std::vector<double> kExponentGrid = {0.4, 0.7, 1.0, 1.5, 2.0, kInf};

}  // namespace

TEST_CASE("mixed_norm: closed-form examples") {
  MixedArray ones = MixedArray::Ones(2, 3);
  CHECK(mixed_norm(ones, ExponentPair(1.0, 2.0)) ==
        doctest::Approx(2.0 * std::sqrt(3.0)).epsilon(1e-14));

  MixedArray single = MixedArray::Zero(3, 4);
  single(1, 2) = 5.0;
  for (double p : {0.5, 1.0, 2.0, kInf})
    for (double q : {0.5, 1.0, 2.0, kInf})
      CHECK(mixed_norm(single, ExponentPair(p, q)) ==
            doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("mixed_norm: matches extended-precision oracle on fixed draw") {
  Rng rng(7);
  MixedArray x = random_array(4, 4, rng);
  const double oracle = naive_mixed_norm(x, 0.5, 1.5);
  const double got = mixed_norm(x, ExponentPair(0.5, 1.5));
  CHECK(got == doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("mixed_norm: zero iff x = 0, input errors") {
  MixedArray z = MixedArray::Zero(3, 2);
  CHECK(mixed_norm(z, ExponentPair(0.7, 2.0)) == 0.0);
  z(2, 1) = 1e-300;
  CHECK(mixed_norm(z, ExponentPair(0.7, 2.0)) > 0.0);
  z(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(mixed_norm(z, ExponentPair(1.0, 1.0)), std::invalid_argument);
}

TEST_CASE("quasi_norm_constant: values and random-search oracle") {
  CHECK(quasi_norm_constant(ExponentPair(1.0, 1.0)) == doctest::Approx(1.0));
  CHECK(quasi_norm_constant(ExponentPair(2.0, 2.0)) == doctest::Approx(1.0));
  CHECK(quasi_norm_constant(ExponentPair(0.5, 2.0)) == doctest::Approx(2.0));

  Rng rng(11);
  for (double p : kExponentGrid) {
    for (double q : kExponentGrid) {
      const ExponentPair e(p, q);
      const double alpha = quasi_norm_constant(e);
      for (int trial = 0; trial < 200; ++trial) {
        MixedArray x = random_array(3, 3, rng);
        MixedArray y = random_array(3, 3, rng);
        const double lhs = mixed_norm(x + y, e);
        const double rhs = alpha * (mixed_norm(x, e) + mixed_norm(y, e));
        CHECK(lhs <= rhs * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("p-norm power inequality") {
  Rng rng(12);
  for (double p : kExponentGrid) {
    for (double q : kExponentGrid) {
      const ExponentPair e(p, q);
      const double rho = std::min({p, q, 1.0});
      for (int trial = 0; trial < 100; ++trial) {
        MixedArray x = random_array(4, 2, rng);
        MixedArray y = random_array(4, 2, rng);
        const double lhs = std::pow(mixed_norm(x + y, e), rho);
        const double rhs =
            std::pow(mixed_norm(x, e), rho) + std::pow(mixed_norm(y, e), rho);
        CHECK(lhs <= rhs * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("split_constant: values and random split search") {
  CHECK(split_constant(ExponentPair(1.0, 1.0)) == doctest::Approx(1.0));
  CHECK(split_constant(ExponentPair(kInf, kInf)) == doctest::Approx(2.0));
  CHECK(split_constant(ExponentPair(0.5, 0.5)) <= 2.0);

  Rng rng(13);
  for (double p : kExponentGrid) {
    for (double q : kExponentGrid) {
      const ExponentPair e(p, q);
      const double beta = split_constant(e);
      CHECK(beta >= 1.0);
      CHECK(beta <= 2.0);
      for (int trial = 0; trial < 200; ++trial) {
        MixedArray x = random_array(3, 3, rng);
        MixedArray xs = x, xc = x;
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) {
            if (rng.uniform() < 0.5)
              xs(i, j) = 0.0;
            else
              xc(i, j) = 0.0;
          }
        const double lhs = mixed_norm(xs, e) + mixed_norm(xc, e);
        CHECK(lhs <= beta * mixed_norm(x, e) * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("outer_threshold") {
  Rng rng(21);
  MixedArray x = random_array(4, 3, rng);
  CHECK(outer_threshold(x, 4, 2.0) == x);
  CHECK(outer_threshold(x, 0, 2.0).isZero(0.0));
  CHECK_THROWS_AS(outer_threshold(x, 5, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(outer_threshold(x, -1, 2.0), std::invalid_argument);

  MixedArray y = MixedArray::Zero(3, 2);
  y.row(0) << 3.0, 0.0;
  y.row(1) << 0.0, 2.0;
  y.row(2) << 1.0, 0.0;
  MixedArray kept = outer_threshold(y, 1, 2.0);
  CHECK(kept.row(0) == y.row(0));
  CHECK(kept.row(1).isZero(0.0));
  CHECK(kept.row(2).isZero(0.0));

  // ties resolve to the lowest row index
  MixedArray tie = MixedArray::Ones(3, 2);
  MixedArray kept_tie = outer_threshold(tie, 2, 2.0);
  CHECK(kept_tie.row(0) == tie.row(0));
  CHECK(kept_tie.row(1) == tie.row(1));
  CHECK(kept_tie.row(2).isZero(0.0));
}

TEST_CASE("inner_threshold") {
  Rng rng(22);
  MixedArray x = random_array(3, 4, rng);
  CHECK(inner_threshold(x, 4) == x);
  CHECK(inner_threshold(x, 0).isZero(0.0));
  CHECK_THROWS_AS(inner_threshold(x, 5), std::invalid_argument);

  MixedArray row(1, 3);
  row << 1.0, -4.0, 2.0;
  MixedArray kept = inner_threshold(row, 1);
  CHECK(kept(0, 0) == 0.0);
  CHECK(kept(0, 1) == -4.0);
  CHECK(kept(0, 2) == 0.0);
}

TEST_CASE("sigma_outer: examples") {
  MixedArray y = MixedArray::Zero(3, 2);
  y.row(0) << 3.0, 0.0;
  y.row(1) << 0.0, 2.0;
  y.row(2) << 1.0, 0.0;
  CHECK(sigma_outer(y, 1, ExponentPair(1.0, 2.0)) == doctest::Approx(3.0));
  CHECK(sigma_outer(y, 0, ExponentPair(1.0, 2.0)) ==
        doctest::Approx(mixed_norm(y, ExponentPair(1.0, 2.0))));
  CHECK(sigma_outer(outer_threshold(y, 2, 2.0), 2, ExponentPair(0.5, 1.0)) ==
        doctest::Approx(0.0));
}

TEST_CASE("sigma_inner: examples") {
  MixedArray x(2, 3);
  x.row(0) << 1.0, 2.0, 3.0;
  x.row(1) << 0.0, 0.0, 4.0;
  CHECK(sigma_inner(x, 1, ExponentPair(2.0, 1.0)) == doctest::Approx(3.0));
  CHECK(sigma_inner(x, 3, ExponentPair(2.0, 1.0)) == 0.0);
  CHECK(sigma_inner(inner_threshold(x, 2), 2, ExponentPair(1.0, 0.7)) == 0.0);
}

TEST_CASE("sigma exactness vs brute force, b,d <= 5") {
  Rng rng(31);
  const std::vector<std::pair<double, double>> exps = {
      {1.0, 2.0}, {0.5, 1.5}, {2.0, 1.0}, {0.7, 0.4}, {kInf, 2.0}, {1.0, kInf}};
  for (int draw = 0; draw < 100; ++draw) {
    const int b = 1 + static_cast<int>(rng.below(5));
    const int d = 1 + static_cast<int>(rng.below(5));
    MixedArray x = random_array(b, d, rng);
    const auto& [p, q] = exps[static_cast<std::size_t>(draw) % exps.size()];
    const ExponentPair e(p, q);
    for (int s = 0; s <= b; ++s)
      CHECK(sigma_outer(x, s, e) ==
            doctest::Approx(brute_sigma_outer(x, s, p, q)).epsilon(1e-12));
    for (int t = 0; t <= d; ++t)
      CHECK(sigma_inner(x, t, e) ==
            doctest::Approx(brute_sigma_inner(x, t, p, q)).epsilon(1e-12));
  }
}

TEST_CASE("Stechkin bounds with constant 1") {
  Rng rng(41);
  // outer: 0 < p < r <= inf
  const std::vector<std::pair<double, double>> outer_pr = {
      {0.5, 1.0}, {1.0, 2.0}, {0.4, kInf}, {1.5, 2.0}};
  for (const auto& [p, r] : outer_pr) {
    for (int trial = 0; trial < 250; ++trial) {
      const int b = 2 + static_cast<int>(rng.below(6));
      const int d = 1 + static_cast<int>(rng.below(4));
      MixedArray x = random_array(b, d, rng);
      const double q = 2.0;
      for (int s = 1; s <= b; ++s) {
        const double lhs = sigma_outer(x, s, ExponentPair(r, q));
        const double rhs = std::pow(s, -(1.0 / p - inv_exp(r))) *
                           mixed_norm(x, ExponentPair(p, q));
        CHECK(lhs <= rhs * (1.0 + 1e-12));
      }
    }
  }
  // inner: 0 < q < u <= inf
  const std::vector<std::pair<double, double>> inner_qu = {
      {0.5, 1.0}, {1.0, 2.0}, {0.4, kInf}, {1.5, 2.0}};
  for (const auto& [q, u] : inner_qu) {
    for (int trial = 0; trial < 250; ++trial) {
      const int b = 1 + static_cast<int>(rng.below(4));
      const int d = 2 + static_cast<int>(rng.below(6));
      MixedArray x = random_array(b, d, rng);
      const double p = 2.0;
      for (int t = 1; t <= d; ++t) {
        const double lhs = sigma_inner(x, t, ExponentPair(p, u));
        const double rhs = std::pow(t, -(1.0 / q - inv_exp(u))) *
                           mixed_norm(x, ExponentPair(p, q));
        CHECK(lhs <= rhs * (1.0 + 1e-12));
      }
    }
  }
}

TEST_CASE("monotone containment: composed thresholds are (s,t)-sparse") {
  Rng rng(51);
  for (int trial = 0; trial < 50; ++trial) {
    const int b = 2 + static_cast<int>(rng.below(5));
    const int d = 2 + static_cast<int>(rng.below(5));
    MixedArray x = random_array(b, d, rng);
    const int s = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(b)));
    const int t = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(d)));
    const MixedArray z = inner_threshold(outer_threshold(x, s, 2.0), t);
    const SupportPattern sp = support_of(z);
    CHECK(sp.outer_sparsity() <= s);
    CHECK(sp.inner_sparsity() <= t);
  }
}

TEST_CASE("SupportPattern counts") {
  MixedArray x = MixedArray::Zero(4, 4);
  x(0, 0) = 1.0;
  x(0, 3) = 2.0;
  x(2, 1) = -1.0;
  const SupportPattern sp = support_of(x);
  CHECK(sp.outer_sparsity() == 2);
  CHECK(sp.inner_sparsity() == 2);
}
