// Deterministic random streams with counter-based substream derivation.
//
// Reproducibility contract: every sampler below is fully specified (no
// implementation-defined std::distribution), so a given (master seed,
// purpose, index) triple yields bit-identical draws on any platform.
// Substreams are derived by hashing, not by splitting sequential state,
// so trials can run in any order on any number of workers.
#pragma once

#include <complex>
#include <cstdint>
#include <string_view>

namespace gfra {

// SplitMix64 output function, used as the seed mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// xoshiro256++ stream with fully specified floating-point and Gaussian
/// samplers. Cheap to construct; hold one per (trial, purpose).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) {
    // Expand the 64-bit key through SplitMix64 as recommended by the
    // xoshiro authors; avoids the all-zero state.
    std::uint64_t z = seed;
    for (auto& w : state_) {
      z = mix64(z);
      w = z ? z : 0x9e3779b97f4a7c15ULL;
    }
  }

  /// Substream keyed by (master seed, purpose tag, index). Order-independent:
  /// derive(s, "pilots", 7) is the same stream no matter when it is created.
  static RandomStream derive(std::uint64_t master_seed, std::string_view purpose,
                             std::uint64_t index = 0) {
    const std::uint64_t k1 = mix64(master_seed ^ fnv1a64(purpose));
    return RandomStream(mix64(k1 ^ (index * 0xd1342543de82ef95ULL + 1)));
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

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos() { return 1.0 - uniform(); }

  /// Uniform integer in [0, bound), unbiased (rejection sampling). bound >= 1.
  std::uint64_t uniform_int(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % bound;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard circularly-symmetric complex Gaussian CN(0, 1):
  /// magnitude^2 ~ Exp(1), phase uniform. Two uniforms per draw.
  std::complex<double> cnormal() {
    const double mag = std::sqrt(-std::log(uniform_pos()));
    const double phase = 6.283185307179586476925286766559 * uniform();
    return {mag * std::cos(phase), mag * std::sin(phase)};
  }

  /// Real standard normal (Box-Muller, cosine branch).
  double normal() {
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    return r * std::cos(6.283185307179586476925286766559 * uniform());
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
};

}  // namespace gfra
