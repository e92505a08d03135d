#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace mixgel {

// splitmix64 step; used both as a generator and to derive child seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic, splittable random stream. Streams for parallel work are
// derived from (seed, index...) so results do not depend on scheduling.
// The state transition is xoshiro256++.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
    cached_valid_ = false;
  }

  // Child stream keyed by one or two indices.
  Rng split(std::uint64_t a, std::uint64_t b = 0x5bf0'3635'dcf6'e1fdULL) const {
    std::uint64_t sm = s_[0] ^ (a * 0x9e3779b97f4a7c15ULL);
    sm ^= splitmix64(sm) + b;
    std::uint64_t mixed = splitmix64(sm) ^ s_[1];
    return Rng(mixed);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0,1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in (0,1]; safe as a log argument.
  double uniform_pos() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; second value of each pair is cached.
  double gaussian() {
    if (cached_valid_) {
      cached_valid_ = false;
      return cached_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_ = radius * std::sin(angle);
    cached_valid_ = true;
    return radius * std::cos(angle);
  }

  // Uniform integer in [0, n) by rejection; n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = n * (UINT64_MAX / n);
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
  double cached_ = 0.0;
  bool cached_valid_ = false;
};

}  // namespace mixgel
