#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace macauth {

/// splitmix64 finalizer; used to derive independent per-stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream,
                                    std::uint64_t counter = 0) {
  return mix_seed(mix_seed(base ^ mix_seed(stream)) + counter);
}

/// mt19937_64 with platform-independent real and categorical draws
/// (std:: distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    // Lemire-style rejection keeps the draw unbiased.
    const std::uint64_t limit = bound == 0 ? 0 : (~std::uint64_t{0} - bound + 1) % bound;
    for (;;) {
      const std::uint64_t r = eng_();
      if (r >= limit) return r % bound;
    }
  }

  /// Inverse-CDF draw from a pmf; mass need not be exactly normalized.
  std::uint32_t categorical(std::span<const double> pmf) {
    double total = 0.0;
    for (double p : pmf) total += p;
    const double r = uniform() * total;
    double acc = 0.0;
    std::uint32_t last = 0;
    for (std::uint32_t i = 0; i < pmf.size(); ++i) {
      if (pmf[i] <= 0.0) continue;
      acc += pmf[i];
      last = i;
      if (r < acc) return i;
    }
    return last;
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace macauth
