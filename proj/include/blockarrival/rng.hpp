#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace blockarrival {

/// Seeded generator used by every randomized operation.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Variates are produced by the conversions below rather than
/// <random> distributions, whose algorithms are implementation-defined, so a
/// (seed, call sequence) pair is bit-reproducible across standard libraries.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64";

  explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on (lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unit-rate exponential by inversion.
  double exponential() { return -std::log(uniform()); }
  double exponential(double mean) { return mean * exponential(); }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

/// SplitMix64 finalizer; maps a counter to a well-mixed 64-bit value.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of replicate `index` under base seed `base`: the (index+1)-th output of
/// a SplitMix64 stream started at `base`.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(base + index * 0x9E3779B97F4A7C15ULL);
}

}  // namespace blockarrival
