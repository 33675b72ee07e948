#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace apf {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Derives an independent stream seed from a base seed and a role tag
/// ("grasp", "move", "eval:coupled", ...). Same inputs, same seed, on any
/// platform.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  std::uint64_t s = base ^ h;
  return splitmix64(s);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t index) {
  std::uint64_t s = derive_seed(base, tag) ^ (0x9e3779b97f4a7c15ull * (index + 1));
  return splitmix64(s);
}

/// Deterministic random source. The engine is std::mt19937_64 (bit-exact per
/// the standard); the distributions are hand-rolled because the standard ones
/// are implementation-defined, and replay/export depend on reproducible draws.
/// Every method consumes a fixed number of engine steps.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller. No spare caching: exactly two engine
  /// steps per call keeps stream accounting simple.
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::size_t uniform_index(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be > 0");
    const std::uint64_t un = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / un * un;
    std::uint64_t x = gen_();
    while (x >= limit) x = gen_();
    return static_cast<std::size_t>(x % un);
  }

 private:
  std::mt19937_64 gen_;
};

/// Cumulative-sum sampler over non-negative masses. Zero-mass entries are
/// never drawn.
class DiscreteSampler {
 public:
  DiscreteSampler() = default;

  explicit DiscreteSampler(std::span<const double> masses) {
    cum_.reserve(masses.size());
    double total = 0.0;
    for (double m : masses) {
      if (m > 0.0) total += m;
      cum_.push_back(total);
    }
    total_ = total;
  }

  bool empty() const { return total_ <= 0.0; }
  double total() const { return total_; }
  std::size_t size() const { return cum_.size(); }

  std::size_t sample(Rng& rng) const {
    if (empty()) throw std::logic_error("DiscreteSampler: no mass to sample");
    const double r = rng.uniform01() * total_;
    auto it = std::upper_bound(cum_.begin(), cum_.end(), r);
    if (it == cum_.end()) --it;
    return static_cast<std::size_t>(it - cum_.begin());
  }

 private:
  std::vector<double> cum_;
  double total_ = 0.0;
};

}  // namespace apf
