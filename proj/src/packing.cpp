#include "mixgel/packing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mixgel/rng.hpp"

namespace mixgel {

namespace {

// |a ∩ b| for sorted index vectors, early exit at cap.
int intersection_size(const std::vector<int>& a, const std::vector<int>& b,
                      int cap) {
  int count = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      if (++count >= cap) return count;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return count;
}

std::vector<int> random_subset(int n, int sz, Rng& rng) {
  // partial Fisher-Yates over [0, n)
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < sz; ++i) {
    const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  std::vector<int> out(pool.begin(), pool.begin() + sz);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

void SetFamily::verify() const {
  for (const auto& mem : members) {
    if (static_cast<int>(mem.size()) != member_size)
      throw std::logic_error("SetFamily: member of wrong size");
    if (!std::is_sorted(mem.begin(), mem.end()))
      throw std::logic_error("SetFamily: member not sorted");
    for (int v : mem)
      if (v < 0 || v >= ground_size)
        throw std::logic_error("SetFamily: index out of range");
    if (std::adjacent_find(mem.begin(), mem.end()) != mem.end())
      throw std::logic_error("SetFamily: repeated index");
  }
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = i + 1; j < members.size(); ++j)
      if (intersection_size(members[i], members[j], intersection_cap) >=
          intersection_cap)
        throw std::logic_error("SetFamily: intersection cap violated");
}

SetFamily build_set_family(int n, int ell, long target_size, long max_attempts,
                           std::uint64_t seed) {
  if (ell < 1 || 2 * ell > n)
    throw std::invalid_argument("build_set_family: need 1 <= ell, 2*ell <= n");
  if (target_size <= 0)
    target_size = static_cast<long>(
        std::ceil(std::pow(n / (8.0 * ell), static_cast<double>(ell))));
  target_size = std::max(target_size, 1L);
  if (max_attempts <= 0) max_attempts = 4000L * target_size + 100000L;

  SetFamily fam;
  fam.ground_size = n;
  fam.member_size = 2 * ell;
  fam.intersection_cap = ell;

  Rng rng(seed);
  for (long attempt = 0;
       attempt < max_attempts &&
       static_cast<long>(fam.members.size()) < target_size;
       ++attempt) {
    auto cand = random_subset(n, 2 * ell, rng);
    bool ok = true;
    for (const auto& mem : fam.members) {
      if (intersection_size(mem, cand, ell) >= ell) {
        ok = false;
        break;
      }
    }
    if (ok) fam.members.push_back(std::move(cand));
  }
  fam.verify();
  if (static_cast<long>(fam.members.size()) < target_size)
    throw ConstructionError("build_set_family: attempts budget exhausted at " +
                                std::to_string(fam.members.size()) + "/" +
                                std::to_string(target_size),
                            fam);
  return fam;
}

double ProductCode::gv_lower_bound() const {
  double denom = 0.0;
  double term = 1.0;  // C(ell, j) (theta-1)^j at j = 0
  for (int j = 0; j <= min_distance - 1; ++j) {
    denom += term;
    term *= static_cast<double>(length - j) / (j + 1) * (alphabet_size - 1);
  }
  return std::pow(static_cast<double>(alphabet_size), length) / denom;
}

namespace {

// Hamming distance >= k test with early success exit.
bool far_enough(const int* a, const int* b, int len, int k) {
  int mism = 0;
  for (int i = 0; i < len; ++i) {
    if (a[i] != b[i] && ++mism >= k) return true;
  }
  return mism >= k;
}

}  // namespace

void ProductCode::verify(std::uint64_t sample_seed) const {
  for (const auto& w : words) {
    if (static_cast<int>(w.size()) != length)
      throw std::logic_error("ProductCode: word of wrong length");
    for (int sym : w)
      if (sym < 0 || sym >= alphabet_size)
        throw std::logic_error("ProductCode: symbol out of range");
  }
  const std::size_t n = words.size();
  if (n <= 10000) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (!far_enough(words[i].data(), words[j].data(), length, min_distance))
          throw std::logic_error("ProductCode: distance floor violated");
  } else {
    Rng rng(sample_seed);
    for (int trial = 0; trial < 100000; ++trial) {
      const auto i = rng.below(n);
      auto j = rng.below(n - 1);
      if (j >= i) ++j;
      if (!far_enough(words[i].data(), words[j].data(), length, min_distance))
        throw std::logic_error("ProductCode: distance floor violated (sampled)");
    }
  }
}

ProductCode gv_code(int theta, int ell, int k, std::uint64_t seed,
                    bool shuffle) {
  if (theta < 2) throw std::invalid_argument("gv_code: need theta >= 2");
  if (k < 1 || k > ell) throw std::invalid_argument("gv_code: need 1 <= k <= ell");
  double space = std::pow(static_cast<double>(theta), ell);
  if (space > 4e6)
    throw std::invalid_argument("gv_code: theta^ell too large to enumerate");
  const std::size_t total = static_cast<std::size_t>(std::llround(space));

  ProductCode code;
  code.length = ell;
  code.alphabet_size = theta;
  code.min_distance = k;

  std::vector<int> word(static_cast<std::size_t>(ell), 0);
  auto next_word = [&](std::vector<int>& w) {
    for (int pos = ell - 1; pos >= 0; --pos) {
      if (++w[static_cast<std::size_t>(pos)] < theta) return true;
      w[static_cast<std::size_t>(pos)] = 0;
    }
    return false;
  };

  if (k == 1) {
    // distance >= 1 means distinct; the full enumeration qualifies
    code.words.reserve(total);
    do {
      code.words.push_back(word);
    } while (next_word(word));
    code.verify(seed);
    return code;
  }

  std::vector<std::size_t> order;
  if (shuffle) {
    order.resize(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    for (std::size_t i = total; i > 1; --i) {
      const auto j = rng.below(i);
      std::swap(order[i - 1], order[j]);
    }
  }

  auto word_at = [&](std::size_t index) {
    std::vector<int> w(static_cast<std::size_t>(ell));
    for (int pos = ell - 1; pos >= 0; --pos) {
      w[static_cast<std::size_t>(pos)] = static_cast<int>(index % theta);
      index /= static_cast<std::size_t>(theta);
    }
    return w;
  };

  for (std::size_t idx = 0; idx < total; ++idx) {
    const std::vector<int> cand =
        shuffle ? word_at(order[idx]) : word_at(idx);
    bool keep = true;
    for (const auto& w : code.words) {
      if (!far_enough(w.data(), cand.data(), ell, k)) {
        keep = false;
        break;
      }
    }
    if (keep) code.words.push_back(cand);
  }
  code.verify(seed);
  return code;
}

MixedArray SparseBinaryVector::to_dense(const MixedShape& shape) const {
  MixedArray x = MixedArray::Zero(shape.b, shape.d);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j : cols[i]) x(rows[i], j) = 1.0;
  return x;
}

double binary_mixed_norm(const std::vector<int>& row_counts,
                         const ExponentPair& e) {
  // Rows of c ones have l_q norm c^{1/q}; assemble the outer l_p norm.
  double acc = 0.0;
  double sup = 0.0;
  for (int c : row_counts) {
    if (c <= 0) continue;
    const double rn = std::pow(static_cast<double>(c), inv_exp(e.q));
    if (std::isinf(e.p))
      sup = std::max(sup, rn);
    else
      acc += std::pow(rn, e.p);
  }
  if (std::isinf(e.p)) return sup;
  return std::pow(acc, inv_exp(e.p));
}

namespace {

int symmetric_difference_size(const std::vector<int>& a,
                              const std::vector<int>& b) {
  int count = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++count;
      ++i;
    } else {
      ++count;
      ++j;
    }
  }
  count += static_cast<int>((a.size() - i) + (b.size() - j));
  return count;
}

}  // namespace

double binary_distance(const SparseBinaryVector& a, const SparseBinaryVector& b,
                       const ExponentPair& e) {
  std::vector<int> counts;
  counts.reserve(a.rows.size() + b.rows.size());
  std::size_t i = 0, j = 0;
  while (i < a.rows.size() || j < b.rows.size()) {
    if (j >= b.rows.size() || (i < a.rows.size() && a.rows[i] < b.rows[j])) {
      counts.push_back(static_cast<int>(a.cols[i].size()));
      ++i;
    } else if (i >= a.rows.size() || b.rows[j] < a.rows[i]) {
      counts.push_back(static_cast<int>(b.cols[j].size()));
      ++j;
    } else {
      counts.push_back(symmetric_difference_size(a.cols[i], b.cols[j]));
      ++i;
      ++j;
    }
  }
  return binary_mixed_norm(counts, e);
}

void PackingFamily::verify(std::uint64_t sample_seed) {
  const double tol = 1e-9;
  max_radius_observed = 0.0;
  for (const auto& v : vectors) {
    if (static_cast<int>(v.rows.size()) > 2 * outer_s)
      throw std::logic_error("PackingFamily: outer sparsity violated");
    std::vector<int> counts;
    for (std::size_t i = 0; i < v.rows.size(); ++i) {
      if (v.rows[i] < 0 || v.rows[i] >= shape.b)
        throw std::logic_error("PackingFamily: row out of range");
      if (static_cast<int>(v.cols[i].size()) > 2 * inner_t)
        throw std::logic_error("PackingFamily: inner sparsity violated");
      for (int c : v.cols[i])
        if (c < 0 || c >= shape.d)
          throw std::logic_error("PackingFamily: column out of range");
      counts.push_back(static_cast<int>(v.cols[i].size()));
    }
    const double radius = binary_mixed_norm(counts, radius_in);
    max_radius_observed = std::max(max_radius_observed, radius);
    if (radius > radius_cap + tol)
      throw std::logic_error("PackingFamily: radius cap violated");
  }

  const std::size_t n = vectors.size();
  min_distance_observed = std::numeric_limits<double>::infinity();
  exhaustive_certificate = n <= 10000;
  auto check_pair = [&](std::size_t i, std::size_t j) {
    const double dist = binary_distance(vectors[i], vectors[j], measured_in);
    min_distance_observed = std::min(min_distance_observed, dist);
    if (dist < distance_floor - tol)
      throw std::logic_error("PackingFamily: distance floor violated");
  };
  if (n < 2) return;  // vacuous pairwise floor; the +inf sentinel stands
  if (exhaustive_certificate) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) check_pair(i, j);
  } else {
    Rng rng(sample_seed);
    for (int trial = 0; trial < 100000; ++trial) {
      const auto i = rng.below(n);
      auto j = rng.below(n - 1);
      if (j >= i) ++j;
      check_pair(i, j);
    }
  }
}

PackingFamily build_sparse_packing(int b, int d, int s, int t,
                                   const ExponentPair& norm_in,
                                   const ExponentPair& measured_in,
                                   std::uint64_t seed) {
  if (b < 8 || d < 8)
    throw std::invalid_argument("build_sparse_packing: need b, d >= 8");
  if (s < 1 || s > b / 8)
    throw std::invalid_argument("build_sparse_packing: need 1 <= s <= b/8");
  if (t < 1 || t > d / 8)
    throw std::invalid_argument("build_sparse_packing: need 1 <= t <= d/8");

  Rng root(seed);
  const std::uint64_t seed_inner = root.next_u64();
  const std::uint64_t seed_gv = root.next_u64();
  const std::uint64_t seed_outer = root.next_u64();
  const std::uint64_t seed_cert = root.next_u64();

  // Stage 1: family of 2t-subsets of [d] with pairwise intersection < t.
  const long inner_target = static_cast<long>(
      std::ceil(std::pow(d / (8.0 * t), static_cast<double>(t))));
  const SetFamily inner = build_set_family(d, t, inner_target, 0, seed_inner);
  const long theta = static_cast<long>(inner.size());

  // Stage 2: tuples in inner^{2s} at pairwise Hamming distance >= s. Distinct
  // inner sets differ in >= 2t coordinates, so >= s differing blocks give the
  // distance floor per pair.
  const int tuple_len = 2 * s;
  const double code_target_f =
      std::pow(d / (8.0 * t), static_cast<double>(s) * t) /
      std::pow(4.0, static_cast<double>(s));
  const long code_target = std::max(1L, static_cast<long>(std::ceil(code_target_f)));

  std::vector<std::vector<int>> tuples;
  if (theta == 1) {
    tuples.push_back(std::vector<int>(static_cast<std::size_t>(tuple_len), 0));
  } else {
    const double space = std::pow(static_cast<double>(theta), tuple_len);
    auto admit = [&](const std::vector<int>& cand) {
      for (const auto& w : tuples)
        if (!far_enough(w.data(), cand.data(), tuple_len, s)) return false;
      return true;
    };
    if (space <= 2e5) {
      std::vector<int> word(static_cast<std::size_t>(tuple_len), 0);
      bool more = true;
      while (more && static_cast<long>(tuples.size()) < code_target) {
        if (admit(word)) tuples.push_back(word);
        more = false;
        for (int pos = tuple_len - 1; pos >= 0; --pos) {
          if (++word[static_cast<std::size_t>(pos)] < theta) {
            more = true;
            break;
          }
          word[static_cast<std::size_t>(pos)] = 0;
        }
      }
    } else {
      Rng rng(seed_gv);
      const long budget = 2000L * code_target + 100000L;
      std::vector<int> word(static_cast<std::size_t>(tuple_len));
      for (long attempt = 0;
           attempt < budget && static_cast<long>(tuples.size()) < code_target;
           ++attempt) {
        for (auto& sym : word)
          sym = static_cast<int>(rng.below(static_cast<std::uint64_t>(theta)));
        if (admit(word)) tuples.push_back(word);
      }
    }
    if (static_cast<long>(tuples.size()) < code_target) {
      SetFamily partial;  // report the inner family; the code stage failed
      partial = inner;
      throw ConstructionError(
          "build_sparse_packing: GV stage reached " +
              std::to_string(tuples.size()) + "/" + std::to_string(code_target),
          partial);
    }
  }

  // Stage 3: family of 2s-subsets of [b] with pairwise intersection < s.
  const long outer_target = static_cast<long>(
      std::ceil(std::pow(b / (8.0 * s), static_cast<double>(s))));
  const SetFamily outer = build_set_family(b, s, outer_target, 0, seed_outer);

  PackingFamily fam{MixedShape(b, d),
                    {},
                    s,
                    t,
                    norm_in,
                    measured_in,
                    std::pow(2.0 * s, inv_exp(norm_in.p)) *
                        std::pow(2.0 * t, inv_exp(norm_in.q)),
                    std::pow(static_cast<double>(s), inv_exp(measured_in.p)) *
                        std::pow(2.0 * t, inv_exp(measured_in.q)),
                    std::pow(b / (32.0 * s), static_cast<double>(s)) *
                        std::pow(d / (8.0 * t), static_cast<double>(s) * t),
                    0.0,
                    0.0,
                    true};

  fam.vectors.reserve(outer.size() * tuples.size());
  for (const auto& rows : outer.members) {
    for (const auto& tuple : tuples) {
      SparseBinaryVector v;
      v.rows = rows;  // sorted; block i of the tuple goes to the i-th row
      v.cols.reserve(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i)
        v.cols.push_back(inner.members[static_cast<std::size_t>(
            tuple[i])]);
      fam.vectors.push_back(std::move(v));
    }
  }

  if (static_cast<double>(fam.vectors.size()) < fam.cardinality_floor)
    throw ConstructionError("build_sparse_packing: cardinality floor missed",
                            outer);
  fam.verify(seed_cert);
  return fam;
}

double volume_packing_cap(int n, double alpha, double eps) {
  if (n < 1 || alpha < 1.0 || !(eps > 0.0))
    throw std::invalid_argument("volume_packing_cap: bad parameters");
  return std::exp(n * (std::log(alpha) + std::log1p(2.0 / eps)));
}

double quotient_packing_cap(int m, double alpha, double radius, double eps,
                            double c) {
  if (m < 1 || !(eps > 0.0) || alpha < 1.0 || radius < 0.0 || c < 0.0)
    throw std::invalid_argument("quotient_packing_cap: bad parameters");
  return m * std::log(alpha + 2.0 * c * alpha * radius / eps);
}

double gel_est_pack_cap(int m, double alpha, double beta, double radius,
                        double eps) {
  return quotient_packing_cap(m, alpha, radius, eps, alpha * beta);
}

}  // namespace mixgel
