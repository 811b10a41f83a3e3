#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace fieldseg {

/// SplitMix64 step; used only to expand a user seed into generator state.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// xorshift64* (shifts 12/25/27, multiplier 0x2545F4914F6CDD1D).
///
/// Every seeded decision in the toolkit (splits, synthetic scenes,
/// degradations) draws from this generator so results agree bit-for-bit
/// across platforms and language ports. The state is splitmix64(seed),
/// replaced by the multiplier constant if that happens to be zero.
class Xorshift64Star {
 public:
  static constexpr std::uint64_t kMultiplier = 0x2545F4914F6CDD1DULL;

  explicit Xorshift64Star(std::uint64_t seed) noexcept
      : state_(splitmix64(seed)) {
    if (state_ == 0) state_ = kMultiplier;
  }

  std::uint64_t next() noexcept {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * kMultiplier;
  }

  /// Uniform integer in [0, n); plain modulo reduction (documented bias).
  std::uint64_t below(std::uint64_t n) noexcept { return n == 0 ? 0 : next() % n; }

  /// Uniform integer in [lo, hi].
  std::int64_t range(std::int64_t lo, std::int64_t hi) noexcept {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; one value per call, no caching.
  double normal() noexcept {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace fieldseg
