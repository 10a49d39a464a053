#pragma once

// Self-contained seeded generator: xoshiro256++ seeded through splitmix64.
// The standard <random> distributions are not pinned to an algorithm by the
// C++ standard, so identical seeds can produce different streams across
// implementations.  Everything here is fixed bit-for-bit, which keeps
// simulation output reproducible across platforms and compilers.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace footsim {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  // Independent stream for simulation index `stream` under a shared root
  // seed.  Child i reseeds from root + (i+1)*golden, so stream 0 never
  // collides with Rng(root) itself.
  static Rng child(std::uint64_t root_seed, std::uint64_t stream) {
    return Rng(root_seed + (stream + 1) * 0x9e3779b97f4a7c15ull);
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

  // Uniform in [0,1) with 53 random bits, the conventional double mapping.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Box-Muller, cosine branch only: consumes exactly two words per call so
  // the stream position stays predictable.  u1 is nudged away from zero to
  // keep the log finite.
  double normal(double mean, double std) {
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + std * (r * std::cos(2.0 * std::numbers::pi * u2));
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
};

}  // namespace footsim
