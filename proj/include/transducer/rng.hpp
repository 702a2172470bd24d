#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

#include "transducer/constants.hpp"

namespace transducer {

// Counter-based seed derivation. Every Monte Carlo member draws from its own
// generator seeded by (run seed, stream, index), so results do not depend on
// evaluation order or thread count.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream,
                                    std::uint64_t index = 0) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) + index);
}

// Stream identifiers, one per consumer.
namespace streams {
inline constexpr std::uint64_t herald_shots = 0x48455241ULL;
inline constexpr std::uint64_t q_samples = 0x51534d50ULL;
inline constexpr std::uint64_t noise_mc = 0x4e4f4953ULL;
inline constexpr std::uint64_t jitter_mc = 0x4a495454ULL;
inline constexpr std::uint64_t subsample = 0x53554253ULL;
inline constexpr std::uint64_t fit_noise = 0x46495454ULL;
}  // namespace streams

// xoshiro256** with hand-rolled distributions; libstdc++ distribution
// algorithms are implementation-defined, these are bit-stable everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) {
      s = splitmix64(s);
      w = s;
    }
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  // Uniform in (0, 1], safe for logarithms.
  double uniform_open() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform() < p; }

  double exponential() { return -std::log(uniform_open()); }

  // Standard normal pair via Box-Muller; no cached state.
  std::complex<double> normal_pair() {
    const double r = std::sqrt(-2.0 * std::log(uniform_open()));
    const double phi = kTwoPi * uniform();
    return {r * std::cos(phi), r * std::sin(phi)};
  }

  double normal() { return normal_pair().real(); }

  // Circular complex Gaussian with E|z|^2 = variance.
  std::complex<double> complex_normal(double variance) {
    return std::sqrt(0.5 * variance) * normal_pair();
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
};

}  // namespace transducer
