#include <gtest/gtest.h>

#include <limits>
#include <numeric>

#include "parsim/money.hpp"
#include "support/gen.hpp"

using namespace parsim;
using parsim::testing::for_all;
using parsim::testing::Gen;

TEST(Money, HalfToEvenDivision) {
  EXPECT_EQ(div_round_half_even(5, 2), 2);
  EXPECT_EQ(div_round_half_even(7, 2), 4);
  EXPECT_EQ(div_round_half_even(-5, 2), -2);
  EXPECT_EQ(div_round_half_even(-7, 2), -4);
  EXPECT_EQ(div_round_half_even(10, 3), 3);
  EXPECT_EQ(div_round_half_even(11, 3), 4);
}

TEST(Money, FloorAndCeil) {
  EXPECT_EQ(div_floor(-1, 2), -1);
  EXPECT_EQ(div_ceil(-1, 2), 0);
  EXPECT_EQ(div_ceil(1, 2), 1);
  EXPECT_EQ(div_floor(1, 2), 0);
}

TEST(Money, OverflowIsFatal) {
  const Amount big{std::numeric_limits<std::int64_t>::max()};
  EXPECT_THROW(big + Amount{1}, OverflowError);
  EXPECT_THROW(-big - Amount{2}, OverflowError);
  EXPECT_THROW(big * 2, OverflowError);
}

TEST(Money, Rendering) {
  EXPECT_EQ(Amount{-1234}.to_string(), "-12.34");
  EXPECT_EQ(Amount{5}.to_string(), "0.05");
  EXPECT_EQ(Fraction::bp(561).to_string(), "0.056100");
  EXPECT_EQ(Fraction::from_micros(-1).to_string(), "-0.000001");
}

TEST(Money, ApplyRoundsOnce) {
  // 333 cents * 0.5 = 166.5 -> 166 (even)
  EXPECT_EQ(apply(Amount{333}, Fraction::from_micros(500'000)), Amount{166});
  EXPECT_EQ(apply(Amount{335}, Fraction::from_micros(500'000)), Amount{168});
  EXPECT_EQ(apply_ceil(Amount{333}, Fraction::from_micros(500'000)), Amount{167});
  EXPECT_EQ(ratio(Amount{1}, Amount{3}), Fraction::from_micros(333'333));
  EXPECT_EQ(divide_ceil(Amount{100}, Fraction::from_micros(990'000)), Amount{102});
  EXPECT_EQ(divide_floor(Amount{100}, Fraction::from_micros(990'000)), Amount{101});
}

TEST(Money, ProRataExamples) {
  EXPECT_EQ(allocate_pro_rata(Amount{10}, {Amount{1}, Amount{1}, Amount{1}}),
            (std::vector<Amount>{Amount{4}, Amount{3}, Amount{3}}));
  EXPECT_EQ(allocate_pro_rata(Amount{7}, {Amount{0}, Amount{0}}), (std::vector<Amount>{Amount{0}, Amount{0}}));
  EXPECT_EQ(allocate_pro_rata(Amount{5}, {Amount{3}, Amount{1}}), (std::vector<Amount>{Amount{4}, Amount{1}}));
}

TEST(MoneyProperty, ProRataSumsAndStaysWithinOneCent) {
  for_all(2000, 11, [](Gen& g, int) {
    const auto n = static_cast<std::size_t>(g.range(1, 8));
    std::vector<Amount> w(n);
    for (auto& x : w) x = g.cents(0, 1'000'000);
    const Amount total = g.cents(0, 10'000'000);
    const auto parts = allocate_pro_rata(total, w);
    const Amount wsum = std::accumulate(w.begin(), w.end(), Amount{});
    const Amount psum = std::accumulate(parts.begin(), parts.end(), Amount{});
    if (wsum.is_zero()) {
      EXPECT_TRUE(psum.is_zero());
      return;
    }
    EXPECT_EQ(psum, total);
    for (std::size_t i = 0; i < n; ++i) {
      const long double exact = static_cast<long double>(total.cents()) * w[i].cents() / wsum.cents();
      EXPECT_LE(std::abs(static_cast<long double>(parts[i].cents()) - exact), 1.0L);
    }
  });
}

TEST(MoneyProperty, ApplyMatchesWideArithmetic) {
  for_all(5000, 12, [](Gen& g, int) {
    const Amount a = g.cents(-1'000'000'000, 1'000'000'000);
    const Fraction f = g.micros(-2'000'000, 2'000'000);
    const __int128 num = static_cast<__int128>(a.cents()) * f.micros();
    // Oracle: floor, then bump on remainder > half, or == half with odd quotient.
    __int128 q = num / 1'000'000;
    __int128 r = num % 1'000'000;
    if (r < 0) {
      r += 1'000'000;
      q -= 1;
    }
    if (r * 2 > 1'000'000 || (r * 2 == 1'000'000 && (q & 1) != 0)) ++q;
    EXPECT_EQ(apply(a, f).cents(), static_cast<std::int64_t>(q));
  });
}
