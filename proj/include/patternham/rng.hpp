#pragma once

#include <array>
#include <cstdint>

namespace patternham {

// Bit-exact generators so that every platform reproduces the same processes.
//
//   SplitMix64: state += 0x9E3779B97F4A7C15;
//               z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9;
//               z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
//               return z ^ (z >> 31);
//   Xoshiro256**: seeded with four consecutive SplitMix64 outputs of the seed.
//   bounded(g, b): Lemire's multiply-shift with rejection, 128-bit product.
//   mix_seed(base, k): the (k+1)-th SplitMix64 output of a generator seeded with base.

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}
  constexpr std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

constexpr std::uint64_t mix_seed(std::uint64_t base, std::uint64_t k) noexcept {
  SplitMix64 s(base + k * 0x9E3779B97F4A7C15ULL);
  return s.next();
}

class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Xoshiro256(std::uint64_t seed) noexcept : s_{} {
    SplitMix64 sm(seed);
    for (auto& w : s_) w = sm.next();
  }

  constexpr std::uint64_t operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  static constexpr std::uint64_t min() noexcept { return 0; }
  static constexpr std::uint64_t max() noexcept { return ~std::uint64_t{0}; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> s_;
};

/// Uniform integer in [0, bound); bound must be positive.
inline std::uint64_t bounded(Xoshiro256& g, std::uint64_t bound) noexcept {
  std::uint64_t x = g();
  __uint128_t m = static_cast<__uint128_t>(x) * bound;
  std::uint64_t low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = g();
      m = static_cast<__uint128_t>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

/// Fisher-Yates shuffle driven by `bounded`, so results do not depend on the standard library.
template <typename Vec>
void shuffle(Vec& v, Xoshiro256& g) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = bounded(g, i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace patternham
