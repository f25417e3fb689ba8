#pragma once

#include <cstdint>

namespace sfq {

/// SplitMix64 (Steele, Lea, Flood). Fully specified, so streams are identical
/// on every platform, unlike the std:: distributions.
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) : s_(seed) {}

  constexpr std::uint64_t next() {
    std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// [0, 1) with 53 random bits.
  constexpr double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n) by rejection (no modulo bias).
  constexpr std::uint64_t below(std::uint64_t n) {
    const std::uint64_t lim = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    for (;;) {
      const std::uint64_t x = next();
      if (x < lim) return x % n;
    }
  }

  /// Independent stream for (seed, index): used per Monte Carlo trial.
  static constexpr SplitMix64 stream(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 a(seed);
    const std::uint64_t k = a.next();
    SplitMix64 b(k ^ (index * 0xd1b54a32d192ed03ULL));
    return SplitMix64(b.next());
  }

 private:
  std::uint64_t s_;
};

}  // namespace sfq
