#pragma once

// Seeded randomness with a portable mapping from raw draws to ranges, so a
// seed reproduces the same run on every standard library.

#include <cstdint>
#include <random>

#include "parsim/money.hpp"

namespace parsim {

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  /// Uniform on [lo, hi] at micro precision.
  Fraction uniform(Fraction lo, Fraction hi) {
    if (hi <= lo) return lo;
    const auto span = static_cast<std::uint64_t>(hi.micros() - lo.micros()) + 1;
    return Fraction::from_micros(lo.micros() + static_cast<std::int64_t>(below(span)));
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace parsim
