#pragma once

// Exact money and fixed-point fractions.
//
// Amount is a signed count of USD minor units (cents). Fraction is a signed
// count of millionths. Every valuation that mixes the two rounds once,
// half-to-even, at the final step.

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace parsim {

/// Thrown when money arithmetic would leave the int64 range. Fatal for a run.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// Integer division of a 128-bit numerator, rounding half to even.
std::int64_t div_round_half_even(__int128 num, std::int64_t den);

/// Integer division rounding toward +infinity (den > 0).
std::int64_t div_ceil(__int128 num, std::int64_t den);

/// Integer division rounding toward -infinity (den > 0).
std::int64_t div_floor(__int128 num, std::int64_t den);

class Amount {
 public:
  constexpr Amount() = default;
  constexpr explicit Amount(std::int64_t cents) : cents_(cents) {}

  static constexpr Amount zero() { return Amount{0}; }
  /// Whole dollars plus cents, e.g. Amount::usd(100) == Amount{100'00}.
  static constexpr Amount usd(std::int64_t dollars) { return Amount{dollars * 100}; }

  constexpr std::int64_t cents() const { return cents_; }
  constexpr bool is_zero() const { return cents_ == 0; }
  constexpr bool is_negative() const { return cents_ < 0; }
  constexpr bool is_positive() const { return cents_ > 0; }

  Amount operator+(Amount o) const;
  Amount operator-(Amount o) const;
  Amount operator-() const;
  Amount& operator+=(Amount o) { return *this = *this + o; }
  Amount& operator-=(Amount o) { return *this = *this - o; }
  Amount operator*(std::int64_t k) const;

  constexpr auto operator<=>(const Amount&) const = default;

  /// "-12.34" style rendering used by emitters; always two decimals.
  std::string to_string() const;

 private:
  std::int64_t cents_ = 0;
};

inline Amount min(Amount a, Amount b) { return a < b ? a : b; }
inline Amount max(Amount a, Amount b) { return a < b ? b : a; }

/// Signed fraction in millionths (1e-6 precision). 1.0 == 1'000'000.
class Fraction {
 public:
  static constexpr std::int64_t kScale = 1'000'000;

  constexpr Fraction() = default;
  static constexpr Fraction from_micros(std::int64_t m) { return Fraction{m}; }
  static constexpr Fraction one() { return Fraction{kScale}; }
  static constexpr Fraction zero() { return Fraction{0}; }
  /// Basis points: 1bp == 100 micros.
  static constexpr Fraction bp(std::int64_t b) { return Fraction{b * 100}; }
  /// Whole or fractional percent expressed in hundredths, e.g. pct_hundredths(561) == 5.61%.
  static constexpr Fraction pct_hundredths(std::int64_t h) { return Fraction{h * 100}; }
  /// Nearest representable fraction to a decimal value (config ingestion only).
  static Fraction from_double(double v);

  constexpr std::int64_t micros() const { return micros_; }
  double to_double() const { return static_cast<double>(micros_) / kScale; }
  /// Rounded to whole basis points, half to even.
  std::int64_t to_bp() const { return div_round_half_even(micros_, 100); }

  constexpr Fraction operator+(Fraction o) const { return Fraction{micros_ + o.micros_}; }
  constexpr Fraction operator-(Fraction o) const { return Fraction{micros_ - o.micros_}; }
  constexpr Fraction operator-() const { return Fraction{-micros_}; }
  /// Product of two fractions, rounded half to even.
  Fraction operator*(Fraction o) const;
  constexpr auto operator<=>(const Fraction&) const = default;

  std::string to_string() const;

 private:
  constexpr explicit Fraction(std::int64_t m) : micros_(m) {}
  std::int64_t micros_ = 0;
};

/// amount * f, rounded half to even.
Amount apply(Amount a, Fraction f);
/// amount * f, rounded up (used when a minimum must be guaranteed).
Amount apply_ceil(Amount a, Fraction f);
/// num / den as a fraction, rounded half to even. den must be non-zero.
Fraction ratio(Amount num, Amount den);
/// amount / f, rounded up. f must be positive.
Amount divide_ceil(Amount a, Fraction f);
/// amount / f, rounded down. f must be positive.
Amount divide_floor(Amount a, Fraction f);

/// Splits `total` in proportion to non-negative `weights`. Leftover cents go to
/// the largest remainders, ties to the lower index.
std::vector<Amount> allocate_pro_rata(Amount total, const std::vector<Amount>& weights);

}  // namespace parsim
