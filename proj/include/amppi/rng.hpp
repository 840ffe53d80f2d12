#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace amppi {

// SplitMix64 output stage; bijective mixer with full avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Counter-based random stream. Every draw is a pure function of
// (key, counter), so streams for distinct keys can be consumed from any
// thread in any order and still reproduce the same values.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : key_(mix64(key ^ kGamma)) {}

  // Stream for a composite key such as (seed, instance, cycle, rollout).
  static RandomStream derive(std::uint64_t seed, std::uint64_t a = 0,
                             std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t k = mix64(seed + kGamma);
    k = mix64(k ^ (a + kGamma));
    k = mix64(k ^ (b + kGamma));
    k = mix64(k ^ (c + kGamma));
    return RandomStream(k);
  }

  std::uint64_t next_u64() { return mix64(key_ + (++counter_) * kGamma); }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t uniform_index(std::uint64_t n) { return n ? next_u64() % n : 0; }

  // Standard normal via Box-Muller; draws come in pairs, the second is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace amppi
