#include "parsim/money.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace parsim {

namespace {

std::int64_t narrow(__int128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() ||
      v < std::numeric_limits<std::int64_t>::min()) {
    throw OverflowError("money arithmetic overflow");
  }
  return static_cast<std::int64_t>(v);
}

std::string fixed(std::int64_t v, std::int64_t scale, int digits) {
  const bool neg = v < 0;
  const unsigned __int128 mag = neg ? -static_cast<__int128>(v) : v;
  const auto whole = static_cast<std::uint64_t>(mag / scale);
  auto frac = std::to_string(static_cast<std::uint64_t>(mag % scale));
  frac.insert(0, digits - frac.size(), '0');
  return (neg ? "-" : "") + std::to_string(whole) + "." + frac;
}

}  // namespace

std::int64_t div_round_half_even(__int128 num, std::int64_t den) {
  if (den == 0) throw std::domain_error("division by zero");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  __int128 q = num / den;
  __int128 r = num % den;
  if (r < 0) {  // floor semantics
    q -= 1;
    r += den;
  }
  const __int128 twice = r * 2;
  if (twice > den || (twice == den && (q & 1) != 0)) q += 1;
  return narrow(q);
}

std::int64_t div_floor(__int128 num, std::int64_t den) {
  __int128 q = num / den;
  if ((num % den != 0) && ((num < 0) != (den < 0))) q -= 1;
  return narrow(q);
}

std::int64_t div_ceil(__int128 num, std::int64_t den) {
  __int128 q = num / den;
  if ((num % den != 0) && ((num < 0) == (den < 0))) q += 1;
  return narrow(q);
}

Amount Amount::operator+(Amount o) const {
  std::int64_t out = 0;
  if (__builtin_add_overflow(cents_, o.cents_, &out)) throw OverflowError("Amount addition overflow");
  return Amount{out};
}

Amount Amount::operator-(Amount o) const {
  std::int64_t out = 0;
  if (__builtin_sub_overflow(cents_, o.cents_, &out)) throw OverflowError("Amount subtraction overflow");
  return Amount{out};
}

Amount Amount::operator-() const { return Amount{0} - *this; }

Amount Amount::operator*(std::int64_t k) const {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(cents_, k, &out)) throw OverflowError("Amount multiplication overflow");
  return Amount{out};
}

std::string Amount::to_string() const { return fixed(cents_, 100, 2); }

Fraction Fraction::from_double(double v) {
  const double scaled = std::nearbyint(v * static_cast<double>(kScale));
  if (!(std::fabs(scaled) < 9.0e18)) throw OverflowError("fraction out of range");
  return Fraction{static_cast<std::int64_t>(scaled)};
}

Fraction Fraction::operator*(Fraction o) const {
  return Fraction{div_round_half_even(static_cast<__int128>(micros_) * o.micros_, kScale)};
}

std::string Fraction::to_string() const { return fixed(micros_, kScale, 6); }

Amount apply(Amount a, Fraction f) {
  return Amount{div_round_half_even(static_cast<__int128>(a.cents()) * f.micros(), Fraction::kScale)};
}

Amount apply_ceil(Amount a, Fraction f) {
  return Amount{div_ceil(static_cast<__int128>(a.cents()) * f.micros(), Fraction::kScale)};
}

Fraction ratio(Amount num, Amount den) {
  return Fraction::from_micros(
      div_round_half_even(static_cast<__int128>(num.cents()) * Fraction::kScale, den.cents()));
}

Amount divide_ceil(Amount a, Fraction f) {
  if (f.micros() <= 0) throw std::domain_error("divide by non-positive fraction");
  return Amount{div_ceil(static_cast<__int128>(a.cents()) * Fraction::kScale, f.micros())};
}

Amount divide_floor(Amount a, Fraction f) {
  if (f.micros() <= 0) throw std::domain_error("divide by non-positive fraction");
  return Amount{div_floor(static_cast<__int128>(a.cents()) * Fraction::kScale, f.micros())};
}

std::vector<Amount> allocate_pro_rata(Amount total, const std::vector<Amount>& weights) {
  std::vector<Amount> out(weights.size());
  __int128 wsum = 0;
  for (const auto& w : weights) wsum += std::max<std::int64_t>(0, w.cents());
  if (wsum == 0 || !total.is_positive()) return out;
  std::vector<std::pair<__int128, std::size_t>> rems;
  Amount assigned;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const __int128 num = static_cast<__int128>(total.cents()) * std::max<std::int64_t>(0, weights[i].cents());
    out[i] = Amount{static_cast<std::int64_t>(num / wsum)};
    assigned += out[i];
    rems.emplace_back(num % wsum, i);
  }
  std::stable_sort(rems.begin(), rems.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::int64_t left = (total - assigned).cents();
  for (std::size_t k = 0; left > 0 && k < rems.size(); ++k, --left) out[rems[k].second] += Amount{1};
  return out;
}


}  // namespace parsim
