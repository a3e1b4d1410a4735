#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "sharp/hashing.hpp"

namespace sharp {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Derives a decorrelated stream seed from one run seed, so each pipeline
/// stage draws from its own sequence and stages can be toggled without
/// shifting another stage's randomness.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view stream) {
  return splitmix64(base ^ fnv1a64(stream));
}

/// Deterministic RNG. Bounded draws use rejection sampling on the raw
/// mt19937_64 output instead of std distributions, whose sequences are
/// implementation-defined; replaying a seed must reproduce selections
/// bit-for-bit anywhere.
class RandomEngine {
public:
  explicit RandomEngine(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  /// Uniform in [0, n). n == 0 yields 0.
  std::uint64_t bounded(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t max = std::mt19937_64::max();
    const std::uint64_t rem = (max % n + 1) % n;  // 2^64 mod n
    const std::uint64_t limit = max - rem;        // accept v <= limit
    std::uint64_t v = next();
    while (v > limit) v = next();
    return v % n;
  }

  /// Uniform double in [0, 1) with 53 bits of precision.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[static_cast<std::size_t>(bounded(i))]);
    }
  }

  /// k distinct indices drawn uniformly from [0, n), returned ascending.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

private:
  std::mt19937_64 gen_;
};

}  // namespace sharp
