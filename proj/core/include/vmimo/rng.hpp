#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace vmimo {

/// Counter-free deterministic RNG used everywhere results must be
/// reproducible byte-for-byte across runs and platforms. xoshiro256++
/// core seeded through the splitmix64 finalizer; all distributions are
/// derived with fixed algorithms (no implementation-defined std::
/// distributions), so a (seed, call sequence) pair pins every draw.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [lo, hi], both inclusive. Rejection sampling,
  /// no modulo bias.
  int uniform_int(int lo, int hi) {
    if (hi < lo) throw std::invalid_argument("uniform_int: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi) - lo + 1;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t draw;
    do {
      draw = next_u64();
    } while (draw >= limit);
    return lo + static_cast<int>(draw % span);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Standard normal via Box-Muller; consumes exactly two uniforms.
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Exponential(1) via inverse CDF.
  double exponential() { return -std::log(1.0 - uniform01()); }

  /// Poisson(mean) by counting unit-rate arrivals; O(mean) per draw but
  /// immune to the exp(-mean) underflow of the product method.
  std::uint64_t poisson(double mean) {
    if (!(mean >= 0.0) || !std::isfinite(mean))
      throw std::invalid_argument("poisson: mean must be finite and >= 0");
    std::uint64_t count = 0;
    double acc = exponential();
    while (acc < mean) {
      ++count;
      acc += exponential();
    }
    return count;
  }

  /// Independent child stream; derivation depends only on this stream's
  /// seed and the tag, never on how much of the parent was consumed.
  RngStream child(std::uint64_t tag) const {
    std::uint64_t x = seed_ ^ (0x9E3779B97F4A7C15ULL * (tag + 1));
    return RngStream(splitmix64(x));
  }

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(
          uniform_int(0, static_cast<int>(i) - 1));
      std::swap(values[i - 1], values[j]);
    }
  }

  std::uint64_t seed() const { return seed_; }

 private:
  static constexpr double kPi = 3.14159265358979323846;

  static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
  std::uint64_t seed_;
};

}  // namespace vmimo
