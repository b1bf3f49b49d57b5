#pragma once

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace jigsaw {

/// Portable seeded randomness. std::mt19937_64's output sequence is fixed by
/// the standard; the distributions below are spelled out so that shuffles and
/// jitter are bit-identical across standard libraries.
class Rng {
 public:
  static constexpr const char* kName = "mt19937_64/fisher-yates-rejection";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform integer in [0, bound), bound > 0, by rejection sampling.
  std::uint64_t uniform_below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x > limit);
    return x % bound;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Fisher-Yates, iterating from the back.
  std::vector<int> permutation(int n) {
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    for (int k = n - 1; k > 0; --k) {
      const auto j = static_cast<int>(uniform_below(static_cast<std::uint64_t>(k) + 1));
      std::swap(p[k], p[j]);
    }
    return p;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace jigsaw
