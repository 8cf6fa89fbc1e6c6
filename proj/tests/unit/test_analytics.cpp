#include <gtest/gtest.h>

#include "parsim/analytics.hpp"
#include "support/gen.hpp"

using namespace parsim;
using namespace parsim::testing;

namespace {

Fraction pct(std::int64_t hundredths) { return Fraction::pct_hundredths(hundredths); }

RepoPosition overnight(Amount principal) {
  RepoPosition r;
  r.principal = principal;
  r.start_day = 0;
  r.second_leg_day = 1;
  return r;
}

TreasuryBill bill(Amount face, int maturity) { return {face, maturity, Fraction::one(), true}; }

}  // namespace

TEST(Leverage, FivePercentIsWell) {
  const auto r = leverage_ratio(Amount{100'000'00}, Amount{95'000'00});
  EXPECT_EQ(r.ratio, pct(500));
  EXPECT_EQ(r.band, FdiciaBand::Well);
}

TEST(Leverage, IssuerStylePairs) {
  EXPECT_EQ(leverage_ratio(Amount{100'000'00}, Amount{94'390'00}).band, FdiciaBand::Well);
  EXPECT_EQ(leverage_ratio(Amount{100'000'00}, Amount{99'840'00}).band, FdiciaBand::Critical);
  EXPECT_EQ(leverage_ratio(Amount{100'000'00}, Amount{99'840'00}).ratio, pct(16));
}

TEST(Leverage, RoundsToBasisPointHundredths) {
  // (3 - 2) / 3 = 33.333...% -> 33.33%
  EXPECT_EQ(leverage_ratio(Amount{3}, Amount{2}).ratio, pct(3333));
}

TEST(Leverage, NonPositiveAssets) {
  try {
    leverage_ratio(Amount{0}, Amount{0});
    FAIL();
  } catch (const AnalyticsError& e) {
    EXPECT_EQ(e.code(), AnalyticsErrc::NonPositiveAssets);
  }
}

TEST(Fdicia, Boundaries) {
  EXPECT_EQ(classify_fdicia(pct(400)), FdiciaBand::Adequate);
  EXPECT_EQ(classify_fdicia(pct(399)), FdiciaBand::Under);
  EXPECT_EQ(classify_fdicia(pct(300)), FdiciaBand::Under);
  EXPECT_EQ(classify_fdicia(pct(299)), FdiciaBand::Significant);
  EXPECT_EQ(classify_fdicia(pct(200)), FdiciaBand::Significant);
  EXPECT_EQ(classify_fdicia(pct(199)), FdiciaBand::Critical);
  EXPECT_EQ(classify_fdicia(pct(500)), FdiciaBand::Well);
  EXPECT_EQ(classify_fdicia(pct(721)), FdiciaBand::Well);
  EXPECT_EQ(classify_fdicia(-pct(100)), FdiciaBand::Critical);
}

TEST(FdiciaProperty, Monotone) {
  for_all(5000, 41, [](Gen& g, int) {
    const Fraction a = g.micros(-100'000, 200'000);
    const Fraction b = g.micros(-100'000, 200'000);
    const Fraction lo = std::min(a, b);
    const Fraction hi = std::max(a, b);
    // Bands are ordered best first, so a better band has a smaller enum value.
    EXPECT_LE(static_cast<int>(classify_fdicia(hi)), static_cast<int>(classify_fdicia(lo)));
  });
}

TEST(LeverageProperty, ScaleInvariant) {
  for_all(3000, 42, [](Gen& g, int) {
    const Amount assets = g.cents(1, 10'000'000);
    const Amount coins = g.cents(0, assets.cents());
    const std::int64_t k = g.range(1, 1000);
    const auto a = leverage_ratio(assets, coins);
    const auto b = leverage_ratio(assets * k, coins * k);
    EXPECT_EQ(a.ratio, b.ratio);
    EXPECT_EQ(a.band, b.band);
  });
}

TEST(Slr, JpMorganStyle) {
  const SlrReport r = slr(Amount{5'80}, Amount{100'00}, Amount{0}, true);
  EXPECT_EQ(r.slr, pct(580));
  EXPECT_EQ(r.lower_bound, pct(500));
  EXPECT_EQ(r.headroom_assets, Amount{16'00});
}

TEST(Slr, AtBoundHasNoHeadroom) {
  EXPECT_EQ(slr(Amount{5'00}, Amount{100'00}, Amount{0}, true).headroom_assets, Amount{0});
  EXPECT_EQ(slr(Amount{4'00}, Amount{100'00}, Amount{0}, true).headroom_assets, Amount{0});
  EXPECT_EQ(slr(Amount{3'00}, Amount{100'00}, Amount{0}, false).headroom_assets, Amount{0});
}

TEST(Slr, NonPositiveDenominator) {
  EXPECT_THROW(slr(Amount{1}, Amount{0}, Amount{0}, true), AnalyticsError);
}

TEST(SlrProperty, HeadroomReachesBound) {
  for_all(3000, 43, [](Gen& g, int) {
    const Amount assets = g.cents(1, 1'000'000'000);
    const Amount exposures = g.cents(0, 500'000'000);
    const Amount capital = g.cents(0, 200'000'000);
    const bool gsib = g.coin();
    const SlrReport r = slr(capital, assets, exposures, gsib);
    if (r.headroom_assets.is_zero()) {
      EXPECT_LE(r.slr.micros(), r.lower_bound.micros() + 1);
      return;
    }
    // capital / (assets + exposures + headroom) hits the bound to within one cent of assets.
    const __int128 denom = static_cast<__int128>(assets.cents()) + exposures.cents() + r.headroom_assets.cents();
    const __int128 lhs = static_cast<__int128>(capital.cents()) * 1'000'000;
    EXPECT_GE(lhs, denom * r.lower_bound.micros());
    EXPECT_LT(lhs, (denom + 1) * r.lower_bound.micros());
  });
}

TEST(Liquidity, AllOvernightRepo) {
  PortfolioState p;
  p.repo.push_back(overnight(Amount{1'000'00}));
  const auto r = liquidity_metrics(p, 0);
  EXPECT_EQ(r.dla_frac, Fraction::one());
  EXPECT_EQ(r.wla_frac, Fraction::one());
  EXPECT_EQ(r.wam_days, Fraction::one());
  EXPECT_EQ(r.wal_days, Fraction::one());
}

TEST(Liquidity, ThirtySeventy) {
  PortfolioState p;
  p.repo.push_back(overnight(Amount{300'00}));
  p.ladder.push_back(bill(Amount{700'00}, 30));
  const auto r = liquidity_metrics(p, 0);
  EXPECT_EQ(r.dla_frac, pct(3000));
  EXPECT_GE(r.dla_frac, pct(2500));
  EXPECT_EQ(r.wam_days, Fraction::from_micros(21'300'000));
}

TEST(Liquidity, MixedReserveSplit) {
  PortfolioState p;
  p.repo.push_back(overnight(Amount{43'00}));
  p.d = Amount{11'00};
  p.ladder.push_back(bill(Amount{24'00}, 45));
  const auto r = liquidity_metrics(p, 0);
  EXPECT_GE(r.dla_frac, ratio(Amount{54}, Amount{78}));
}

TEST(LiquidityProperty, OrderingAndRemovalMonotone) {
  for_all(2000, 44, [](Gen& g, int) {
    PortfolioState p;
    p.d = g.cents(0, 100'000);
    const int n = static_cast<int>(g.range(0, 5));
    for (int i = 0; i < n; ++i) {
      RepoPosition r = overnight(g.cents(1, 100'000));
      r.second_leg_day = static_cast<int>(g.range(1, 30));
      p.repo.push_back(r);
    }
    const int m = static_cast<int>(g.range(1, 5));
    for (int i = 0; i < m; ++i) p.ladder.push_back(bill(g.cents(1, 100'000), static_cast<int>(g.range(1, 93))));
    const auto r = liquidity_metrics(p, 0);
    EXPECT_LE(r.dla_frac, r.wla_frac);
    EXPECT_LE(r.wla_frac, Fraction::one());
    EXPECT_LE(r.wam_days, r.wal_days);

    PortfolioState trimmed = p;
    std::erase_if(trimmed.ladder, [](const TreasuryBill& b) { return b.maturity_day > 5; });
    if (trimmed.ladder.size() == p.ladder.size()) return;
    const auto t = liquidity_metrics(trimmed, 0);
    // Rounding of two half-even ratios can cost one micro.
    EXPECT_GE(t.wla_frac.micros() + 1, r.wla_frac.micros());
  });
}
