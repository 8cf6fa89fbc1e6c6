#include <gtest/gtest.h>

#include "parsim/instruments.hpp"
#include "parsim/market.hpp"
#include "parsim/srf.hpp"
#include "support/gen.hpp"
#include "support/world.hpp"

using namespace parsim;
using namespace parsim::testing;

namespace {

// A dealer whose equity is `capital` on a balance sheet of `assets`, split into bills and reserves.
AgentId capitalized_dealer(TestWorld& t, const std::string& name, Amount assets, Amount capital,
                           Amount bills = Amount{0}) {
  const AgentId d = t.dealer(name, assets - bills);
  t.treasuries(d, SecurityClass::Bill, bills);
  t.other_liabilities(d, assets - capital);
  return d;
}

DealerProfile profile(AgentId id) {
  DealerProfile p;
  p.id = id;
  return p;
}

struct SaleFixture {
  TestWorld t;
  AgentId bank;
  AgentId seller;
  AgentId dealer;

  SaleFixture(Amount dealer_assets, Amount dealer_capital) {
    bank = t.bank("bank", Amount{0});
    seller = t.depositor(AgentKind::TreasuryBuyer, "seller", bank, Amount{0});
    t.treasuries(seller, SecurityClass::Bill, Amount{1'000'00});
    t.treasuries(seller, SecurityClass::Long, Amount{1'000'00});
    dealer = capitalized_dealer(t, "dealer", dealer_assets, dealer_capital);
  }
};

}  // namespace

TEST(Decompose, RetentionChain) {
  const auto v = decompose(Amount{216'00}, Amount{72'50}, 2);
  EXPECT_EQ(v.seller, Amount{216'00});
  EXPECT_EQ(v.interdealer, Amount{143'50});
  EXPECT_EQ(v.buyer, Amount{143'50});
  EXPECT_EQ(v.gross, Amount{503'00});
}

TEST(Decompose, SingleDealerHasNoInterdealerLeg) {
  const auto v = decompose(Amount{216'00}, Amount{72'50}, 1);
  EXPECT_EQ(v.interdealer, Amount{0});
  EXPECT_EQ(v.gross, Amount{359'50});
}

TEST(Decompose, DefaultRetentionMatchesShare) {
  DealerChain chain{{AgentId{AgentKind::BrokerDealer, 0}, AgentId{AgentKind::BrokerDealer, 1}}, kDefaultRetention};
  const auto v = chain.decompose(Amount{216'00});
  EXPECT_EQ(v.retention, Amount{72'50});
}

TEST(DecomposeProperty, GrossIdentity) {
  for_all(3000, 51, [](Gen& g, int) {
    const Amount seller = g.cents(0, 1'000'000'000);
    const Amount retention = g.cents(0, seller.cents());
    const int n = static_cast<int>(g.range(1, 5));
    const auto v = decompose(seller, retention, n);
    const Amount hops = n >= 2 ? (seller - retention) * (n - 1) : Amount{0};
    EXPECT_EQ(v.gross, seller + hops + (seller - retention));
    EXPECT_EQ(v.buyer + v.retention, seller);
  });
}

TEST(Capacity, HeadroomFromSlr) {
  TestWorld t;
  const AgentId d = capitalized_dealer(t, "d", Amount{100'00}, Amount{5'80});
  Market m(MarketParams{}, {profile(d)}, {});
  EXPECT_EQ(m.capacity(t.world), Amount{16'00});
}

TEST(Capacity, ZeroAtBound) {
  TestWorld t;
  const AgentId d = capitalized_dealer(t, "d", Amount{100'00}, Amount{5'00});
  Market m(MarketParams{}, {profile(d)}, {});
  EXPECT_EQ(m.capacity(t.world), Amount{0});
}

TEST(Capacity, ReserveAccessCapsWithoutSrf) {
  TestWorld t;
  const AgentId d = capitalized_dealer(t, "d", Amount{100'00}, Amount{10'00});
  DealerProfile p = profile(d);
  p.reserve_access = Amount{30'00};
  Market m(MarketParams{}, {p}, {});
  EXPECT_EQ(m.capacity(t.world), Amount{30'00});
}

TEST(Capacity, NonMarketMakerExcluded) {
  TestWorld t;
  const AgentId d = capitalized_dealer(t, "d", Amount{100'00}, Amount{10'00});
  DealerProfile p = profile(d);
  p.market_maker = false;
  Market m(MarketParams{}, {p}, {});
  EXPECT_EQ(m.capacity(t.world), Amount{0});
}

TEST(SubmitSale, ZeroCapacityLeavesOrderUnfilled) {
  SaleFixture f(Amount{100'00}, Amount{5'00});
  Market m(MarketParams{}, {profile(f.dealer)}, {});
  const auto r = submit_sale(m, f.t.world, f.seller, Amount{100'00}, SecurityClass::Bill);
  EXPECT_EQ(r.filled_face, Amount{0});
  EXPECT_EQ(r.unfilled_face, Amount{100'00});
  EXPECT_EQ(f.t.world.events.count("Fill"), 0u);
  EXPECT_EQ(m.pending_face(f.seller, SecurityClass::Bill), Amount{100'00});
}

TEST(SubmitSale, FillsWithinCapacityAndSettlesNextDay) {
  SaleFixture f(Amount{1'000'00}, Amount{100'00});
  Market m(MarketParams{}, {profile(f.dealer)}, {});
  m.begin_day(0);
  const auto r = submit_sale(m, f.t.world, f.seller, Amount{100'00}, SecurityClass::Bill);
  EXPECT_EQ(r.filled_face, Amount{100'00});
  EXPECT_EQ(r.unfilled_face, Amount{0});
  ASSERT_EQ(r.fills.size(), 1u);
  EXPECT_EQ(r.fills[0].settle_day, 1);

  // Nothing moves on the trade date.
  RepoBook book;
  m.settle_due(f.t.world, book, 0);
  EXPECT_EQ(f.t.face(f.seller, SecurityClass::Bill), Amount{1'000'00});
  EXPECT_EQ(f.t.deposits(f.seller), Amount{0});

  m.begin_day(1);
  m.settle_due(f.t.world, book, 1);
  EXPECT_EQ(f.t.face(f.seller, SecurityClass::Bill), Amount{900'00});
  EXPECT_EQ(f.t.face(f.dealer, SecurityClass::Bill), Amount{100'00});
  EXPECT_EQ(f.t.deposits(f.seller), Amount{100'00});
  EXPECT_TRUE(audit(f.t.world).ok());
}

TEST(SubmitSale, PartialFillAtCapacity) {
  // Headroom: 20 / 0.05 - 200 = 200.
  SaleFixture f(Amount{200'00}, Amount{20'00});
  Market m(MarketParams{}, {profile(f.dealer)}, {});
  const auto r = submit_sale(m, f.t.world, f.seller, Amount{500'00}, SecurityClass::Bill);
  EXPECT_EQ(r.filled_face, Amount{200'00});
  EXPECT_EQ(r.unfilled_face, Amount{300'00});
  EXPECT_EQ(m.capacity(f.t.world), Amount{0});
}

TEST(PriceImpact, Shape) {
  MarketParams p;
  p.depth = Amount{1'000'00};
  EXPECT_EQ(price_impact(Amount{0}, p, SecurityClass::Bill), Fraction::zero());
  EXPECT_EQ(price_impact(Amount{10'00}, p, SecurityClass::Bill), Fraction::pct_hundredths(100));
  EXPECT_EQ(price_impact(Amount{10'00}, p, SecurityClass::Long), Fraction::pct_hundredths(200));
  EXPECT_EQ(price_impact(Amount{900'00}, p, SecurityClass::Long), p.max_dislocation);
  p.flight_to_safety = true;
  EXPECT_EQ(price_impact(Amount{10'00}, p, SecurityClass::Bill), Fraction::zero());
  EXPECT_EQ(price_impact(Amount{10'00}, p, SecurityClass::Long), Fraction::pct_hundredths(200));
}

TEST(PriceImpactProperty, MonotoneAndBounded) {
  for_all(3000, 52, [](Gen& g, int) {
    MarketParams p;
    p.depth = g.cents(1, 100'000'000);
    p.impact_coeff = g.micros(0, 5'000'000);
    const Amount a = g.cents(0, 200'000'000);
    const Amount b = g.cents(0, 200'000'000);
    const auto cls = g.coin() ? SecurityClass::Bill : SecurityClass::Long;
    const Fraction fa = price_impact(min(a, b), p, cls);
    const Fraction fb = price_impact(max(a, b), p, cls);
    EXPECT_LE(fa, fb);
    EXPECT_GE(fa, Fraction::zero());
    EXPECT_LE(fb, p.max_dislocation);
  });
}

TEST(FundingGap, ResidualSplitsAcrossCollateral) {
  SaleFixture f(Amount{1'000'00}, Amount{100'00});
  Market m(MarketParams{}, {profile(f.dealer)}, {});
  FundingGap gap;
  gap.repo_id = 7;
  gap.borrower = f.seller;
  gap.amount = Amount{100'00};
  gap.long_share = Fraction::pct_hundredths(7500);
  const GapPlan plan = m.funding_gap_liquidation(f.t.world, gap);
  EXPECT_EQ(plan.replacement, Amount{0});
  EXPECT_EQ(plan.long_face, Amount{75'00});
  EXPECT_EQ(plan.bill_face, Amount{25'00});
  EXPECT_EQ(plan.orders.size(), 2u);
  EXPECT_TRUE(m.has_gap(7));
}

TEST(FundingGap, ReplacementReducesSales) {
  SaleFixture f(Amount{1'000'00}, Amount{100'00});
  MarketParams p;
  p.replacement_frac = Fraction::pct_hundredths(4000);
  Market m(p, {profile(f.dealer)}, {});
  FundingGap gap;
  gap.repo_id = 1;
  gap.borrower = f.seller;
  gap.amount = Amount{100'00};
  gap.long_share = Fraction::pct_hundredths(7500);
  const GapPlan plan = m.funding_gap_liquidation(f.t.world, gap);
  EXPECT_EQ(plan.replacement, Amount{40'00});
  EXPECT_EQ(plan.long_face, Amount{45'00});
  EXPECT_EQ(plan.bill_face, Amount{15'00});
}

struct GapSale {
  TestWorld t;
  AgentId bank, issuer, lender, borrower, buyer;
  std::uint64_t repo = 0;
  Market m;

  explicit GapSale(Amount gap_amount) {
    bank = t.bank("bank", Amount{2'000'00});
    issuer = t.depositor(AgentKind::Issuer, "issuer", bank, Amount{100'00});
    lender = t.depositor(AgentKind::TreasuryBuyer, "lender", bank, Amount{1'000'00});
    borrower = capitalized_dealer(t, "d0", Amount{1'000'00}, Amount{100'00}, Amount{500'00});
    buyer = capitalized_dealer(t, "d1", Amount{1'000'00}, Amount{100'00});
    RepoTerms terms;
    terms.haircut = Fraction::zero();
    terms.term_days = 3;
    terms.long_share = Fraction::zero();
    const RepoPosition& pos = open_reverse_repo(t.world, t.book, issuer, borrower, Amount{50'00}, terms);
    repo = pos.id;
    m = Market(MarketParams{}, {profile(borrower), profile(buyer)}, {lender});
    m.begin_day(1);
    m.funding_gap_liquidation(t.world, decline_roll(t.world, pos, gap_amount));
    m.clear(t.world);
    m.begin_day(2);
  }

  Amount deposits() const { return t.deposits(issuer) + t.deposits(lender); }
};

TEST(GapSale, ProceedsRepayLenderEarly) {
  GapSale g(Amount{50'00});
  const Amount before = g.deposits();
  g.m.settle_due(g.t.world, g.t.book, 2);
  EXPECT_EQ(g.deposits(), before);
  EXPECT_EQ(g.t.deposits(g.issuer), Amount{100'00});
  EXPECT_EQ(g.t.book.find(g.repo), nullptr);
  EXPECT_FALSE(g.m.has_gap(g.repo));
  EXPECT_EQ(g.t.world.sheet(g.borrower).position(Side::Asset, tkey(SecurityClass::Bill)), Amount{450'00});
  const auto early = g.m.take_early_repayments();
  ASSERT_EQ(early.size(), 1u);
  EXPECT_EQ(early[0].amount, Amount{50'00});
  EXPECT_EQ(early[0].lender, g.issuer);
  EXPECT_TRUE(g.m.take_early_repayments().empty());
}

TEST(GapSale, PartialGapLeavesRepoOpen) {
  GapSale g(Amount{20'00});
  const Amount before = g.deposits();
  g.m.settle_due(g.t.world, g.t.book, 2);
  EXPECT_EQ(g.deposits(), before);
  ASSERT_NE(g.t.book.find(g.repo), nullptr);
  EXPECT_EQ(g.t.book.find(g.repo)->principal, Amount{30'00});
  EXPECT_FALSE(g.m.has_gap(g.repo));
  EXPECT_EQ(g.t.world.events.count("RepoEarlyRepayment"), 1u);
}

TEST(Srf, DisabledRefuses) {
  TestWorld t;
  const AgentId d = capitalized_dealer(t, "d", Amount{100'00}, Amount{10'00}, Amount{50'00});
  try {
    srf_leg(t.world, profile(d), Amount{10'00}, false, SlrParams{});
    FAIL();
  } catch (const SrfError& e) {
    EXPECT_EQ(e.code(), SrfErrc::Disabled);
  }
}

TEST(Srf, BoundBySlrHeadroom) {
  TestWorld t;
  // Equity 5.80 on 100.00 of assets: 16.00 of headroom.
  const AgentId d = capitalized_dealer(t, "d", Amount{100'00}, Amount{5'80}, Amount{50'00});
  try {
    srf_leg(t.world, profile(d), Amount{16'01}, true, SlrParams{});
    FAIL();
  } catch (const SrfError& e) {
    EXPECT_EQ(e.code(), SrfErrc::SlrBound);
  }
  EXPECT_EQ(t.world.events.count("SrfDraw"), 0u);
}

TEST(Srf, DrawGrowsReservesAndLoan) {
  TestWorld t;
  const AgentId d = capitalized_dealer(t, "d", Amount{100'00}, Amount{5'80}, Amount{50'00});
  const Amount before = t.world.spendable(d);
  srf_leg(t.world, profile(d), Amount{16'00}, true, SlrParams{});
  EXPECT_EQ(t.world.spendable(d), before + Amount{16'00});
  EXPECT_EQ(t.world.sheet(d).position(Side::Liability, {InstrumentKind::SrfLoan, SecurityClass::None, kFed}),
            Amount{16'00});
  EXPECT_EQ(t.face(d, SecurityClass::Bill), Amount{34'00});
  EXPECT_EQ(t.world.events.count("SrfDraw"), 1u);
  EXPECT_TRUE(audit(t.world).ok());
}

TEST(Srf, NeedsCollateral) {
  TestWorld t;
  const AgentId d = capitalized_dealer(t, "d", Amount{100'00}, Amount{10'00});
  try {
    srf_leg(t.world, profile(d), Amount{10'00}, true, SlrParams{});
    FAIL();
  } catch (const SrfError& e) {
    EXPECT_EQ(e.code(), SrfErrc::InsufficientCollateral);
  }
}

TEST(MarketProperty, FillsNeverExceedCapacityOrOrders) {
  for_all(300, 53, [](Gen& g, int) {
    TestWorld t;
    const AgentId bank = t.bank("bank", Amount{0});
    std::vector<DealerProfile> dealers;
    const int nd = static_cast<int>(g.range(1, 4));
    for (int i = 0; i < nd; ++i) {
      const Amount assets = g.cents(1'000, 10'000'000);
      const Amount capital = g.cents(0, assets.cents() / 5);
      DealerProfile p = profile(capitalized_dealer(t, "d" + std::to_string(i), assets, capital));
      if (g.coin()) p.reserve_access = g.cents(0, 1'000'000);
      dealers.push_back(p);
    }
    MarketParams params;
    params.srf_enabled = g.coin();
    Market m(params, dealers, {});
    const Amount cap = m.capacity(t.world);
    Amount asked;
    const int ns = static_cast<int>(g.range(1, 4));
    for (int i = 0; i < ns; ++i) {
      const AgentId s = t.depositor(AgentKind::TreasuryBuyer, "s" + std::to_string(i), bank, Amount{0});
      const Amount face = g.cents(1, 5'000'000);
      t.treasuries(s, SecurityClass::Bill, face);
      m.submit(t.world, s, SecurityClass::Bill, face);
      asked += face;
    }
    const auto rep = m.clear(t.world);
    Amount filled;
    for (const auto& r : rep.reports) {
      EXPECT_LE(r.filled_face, r.requested_face);
      filled += r.filled_value;
    }
    EXPECT_LE(filled, cap);
    EXPECT_LE(filled, asked);
    EXPECT_TRUE(filled == asked || filled == cap) << "filled " << filled.to_string();
  });
}
