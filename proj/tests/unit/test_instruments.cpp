#include <gtest/gtest.h>

#include "parsim/instruments.hpp"
#include "support/gen.hpp"
#include "support/world.hpp"

using namespace parsim;
using namespace parsim::testing;

namespace {

struct RepoWorld : ::testing::Test {
  TestWorld t;
  AgentId bank, lender, dealer;

  void SetUp() override {
    bank = t.bank("bank", Amount{1'000'000'00});
    lender = t.depositor(AgentKind::Issuer, "issuer", bank, Amount{100'000'00});
    dealer = t.dealer("dealer", Amount{50'000'00});
    t.treasuries(dealer, SecurityClass::Bill, Amount{50'000'00});
    t.treasuries(dealer, SecurityClass::Long, Amount{50'000'00});
  }

  RepoTerms terms(Fraction h, int days = 1, Fraction rate = Fraction::zero()) {
    RepoTerms r;
    r.haircut = h;
    r.term_days = days;
    r.rate = rate;
    return r;
  }
};

}  // namespace

TEST(PortfolioStep, ZeroCase) {
  PortfolioState p;
  p.t_face = Amount{100'000'00};
  const PortfolioState n = step_portfolio(p, Fraction::zero(), Amount{});
  EXPECT_EQ(n.total(), p.total());
}

TEST(PortfolioStep, InterestOnly) {
  PortfolioState p;
  p.t_face = Amount{100'000'00};
  p.r_t = Fraction::pct_hundredths(100);
  EXPECT_EQ(step_portfolio(p, Fraction::zero(), Amount{}).total() - p.total(), Amount{1'000'00});
}

TEST(PortfolioStep, CapitalLoss) {
  PortfolioState p;
  p.t_face = Amount{100'000'00};
  EXPECT_EQ(step_portfolio(p, -Fraction::bp(50), Amount{}).total() - p.total(), Amount{-500'00});
}

TEST(PortfolioStep, PriceTickMatchesLedgerRemark) {
  TestWorld t;
  const AgentId b = t.bank("b", Amount{0});
  const AgentId i = t.depositor(AgentKind::Issuer, "i", b, Amount{0});
  t.treasuries(i, SecurityClass::Bill, Amount{100'000'00});
  RepoBook book;
  const Amount before = t.world.sheet(i).total_assets();
  mark_treasuries(t.world, book, SecurityClass::Bill, -Fraction::bp(50));
  EXPECT_EQ(t.world.sheet(i).total_assets() - before, Amount{-500'00});
  EXPECT_TRUE(audit(t.world).ok());
}

TEST(PortfolioStepProperty, CapitalGainsAreAdditiveAtZeroRates) {
  for_all(1000, 31, [](Gen& g, int) {
    PortfolioState p;
    p.t_face = g.cents(0, 1'000'000'000);
    p.d = g.cents(0, 1'000'000'000);
    const Fraction a = g.micros(-20'000, 20'000);
    const Fraction b = g.micros(-20'000, 20'000);
    const Amount da = g.cents(-1'000'000, 1'000'000);
    const Amount db = g.cents(-1'000'000, 1'000'000);
    const PortfolioState once = step_portfolio(p, a + b, da + db);
    const PortfolioState twice = step_portfolio(step_portfolio(p, a, da), b, db);
    EXPECT_EQ(once.total(), twice.total());
  });
}

TEST_F(RepoWorld, TwoPercentHaircutCollateral) {
  const RepoPosition& pos = open_reverse_repo(t.world, t.book, lender, dealer, Amount{100'00}, terms(Fraction::bp(200)));
  EXPECT_GE(pos.collateral_value(t.world.marks()), Amount{102'00});
  EXPECT_EQ(pos.second_leg_day, 1);
  EXPECT_TRUE(pos.overnight());
  EXPECT_TRUE(audit(t.world).ok());
}

TEST_F(RepoWorld, ZeroHaircutIsExact) {
  const RepoPosition& pos = open_reverse_repo(t.world, t.book, lender, dealer, Amount{100'00}, terms(Fraction::zero()));
  EXPECT_EQ(pos.collateral_value(t.world.marks()), Amount{100'00});
}

TEST_F(RepoWorld, LongShareDefault) {
  const RepoPosition& pos = open_reverse_repo(t.world, t.book, lender, dealer, Amount{10'000'00}, terms(Fraction::zero()));
  EXPECT_EQ(pos.collateral_face.at(SecurityClass::Long), Amount{7'500'00});
  EXPECT_EQ(pos.collateral_face.at(SecurityClass::Bill), Amount{2'500'00});
}

TEST(Repo, InsufficientCollateral) {
  TestWorld t;
  const AgentId b = t.bank("b", Amount{0});
  const AgentId l = t.depositor(AgentKind::Issuer, "l", b, Amount{1'000'00});
  const AgentId d = t.dealer("d", Amount{0});
  t.treasuries(d, SecurityClass::Bill, Amount{101'00});
  RepoBook book;
  RepoTerms terms;
  terms.haircut = Fraction::bp(200);
  const std::string before = snapshot(t.world).to_json();
  try {
    open_reverse_repo(t.world, book, l, d, Amount{100'00}, terms);
    FAIL();
  } catch (const InstrumentError& e) {
    EXPECT_EQ(e.code(), InstrumentErrc::InsufficientCollateral);
  }
  EXPECT_EQ(snapshot(t.world).to_json(), before);
}

TEST(Repo, InsufficientCash) {
  TestWorld t;
  const AgentId b = t.bank("b", Amount{0});
  const AgentId l = t.depositor(AgentKind::Issuer, "l", b, Amount{99'00});
  const AgentId d = t.dealer("d", Amount{0});
  t.treasuries(d, SecurityClass::Bill, Amount{1'000'00});
  RepoBook book;
  try {
    open_reverse_repo(t.world, book, l, d, Amount{100'00}, RepoTerms{});
    FAIL();
  } catch (const InstrumentError& e) {
    EXPECT_EQ(e.code(), InstrumentErrc::InsufficientCash);
  }
}

TEST_F(RepoWorld, PerformanceReturnsPrincipalPlusInterest) {
  const Amount cash0 = t.deposits(lender);
  const auto& pos =
      open_reverse_repo(t.world, t.book, lender, dealer, Amount{10'000'00}, terms(Fraction::bp(200), 3, Fraction::bp(2)));
  const auto id = pos.id;
  t.world.set_day(2);
  EXPECT_THROW(close_or_default_repo(t.world, t.book, id, 2, true, Fraction::zero()), InstrumentError);
  t.world.set_day(3);
  const SettlementOutcome out = close_or_default_repo(t.world, t.book, id, 3, true, Fraction::zero());
  // 10,000.00 * 0.0002 * 3 days
  EXPECT_EQ(out.interest, Amount{6'00});
  EXPECT_EQ(t.deposits(lender), cash0 + Amount{6'00});
  EXPECT_EQ(t.book.find(id), nullptr);
  EXPECT_TRUE(audit(t.world).ok());
}

TEST_F(RepoWorld, RoundTripChangesEquityOnlyByInterest) {
  const Amount el = t.world.sheet(lender).equity();
  const Amount ed = t.world.sheet(dealer).equity();
  const auto id =
      open_reverse_repo(t.world, t.book, lender, dealer, Amount{25'000'00}, terms(Fraction::bp(200), 2, Fraction::bp(1))).id;
  t.world.set_day(2);
  const auto out = close_or_default_repo(t.world, t.book, id, 2, true, Fraction::zero());
  EXPECT_EQ(t.world.sheet(lender).equity() - el, out.interest);
  EXPECT_EQ(ed - t.world.sheet(dealer).equity(), out.interest);
}

TEST_F(RepoWorld, DefaultWithinHaircutLosesNothing) {
  const auto id = open_reverse_repo(t.world, t.book, lender, dealer, Amount{10'000'00}, terms(Fraction::bp(200))).id;
  t.world.set_day(1);
  const auto out = close_or_default_repo(t.world, t.book, id, 1, false, Fraction::bp(100));
  EXPECT_FALSE(out.performed);
  EXPECT_EQ(out.loss, Amount{});
  EXPECT_FALSE(out.collateral_seized.empty());
  EXPECT_TRUE(audit(t.world).ok());
}

TEST_F(RepoWorld, DefaultBeyondHaircutMatchesLiquidation) {
  const Amount p{10'000'00};
  const auto id = open_reverse_repo(t.world, t.book, lender, dealer, p, terms(Fraction::bp(200))).id;
  t.world.set_day(1);
  const auto out = close_or_default_repo(t.world, t.book, id, 1, false, Fraction::bp(500));
  // Collateral worth 102% of principal loses 5 points of the first-leg price: recovers 97%.
  EXPECT_EQ(out.loss, Amount{300'00});
}

TEST_F(RepoWorld, RollAtSameRate) {
  const Amount cash0 = t.deposits(lender);
  const auto id = open_reverse_repo(t.world, t.book, lender, dealer, Amount{10'000'00},
                                    terms(Fraction::bp(200), 1, Fraction::bp(1)))
                      .id;
  t.world.set_day(1);
  const RepoPosition& rolled = roll_repo(t.world, t.book, id, 1, Fraction::bp(1));
  EXPECT_EQ(rolled.second_leg_day, 2);
  EXPECT_EQ(t.deposits(lender), cash0 - Amount{10'000'00} + Amount{1'00});
  EXPECT_TRUE(audit(t.world).ok());
}

TEST_F(RepoWorld, RollAtHigherRateAfterDecline) {
  const auto id = open_reverse_repo(t.world, t.book, lender, dealer, Amount{10'000'00},
                                    terms(Fraction::bp(200), 1, Fraction::bp(1)))
                      .id;
  mark_treasuries(t.world, t.book, -Fraction::bp(100));
  t.world.set_day(1);
  const RepoPosition& rolled = roll_repo(t.world, t.book, id, 1, Fraction::bp(3));
  EXPECT_EQ(rolled.rate, Fraction::bp(3));
  EXPECT_EQ(rolled.interest(), Amount{3'00});
  EXPECT_GE(rolled.collateral_value(t.world.marks()), required_collateral(Amount{10'000'00}, Fraction::bp(200)));
}

TEST_F(RepoWorld, DeclineToRollEmitsFundingGap) {
  const auto& pos = open_reverse_repo(t.world, t.book, lender, dealer, Amount{10'000'00}, terms(Fraction::bp(200)));
  const FundingGap gap = decline_roll(t.world, pos, Amount{4'000'00});
  EXPECT_EQ(gap.amount, Amount{4'000'00});
  EXPECT_EQ(gap.borrower, dealer);
  EXPECT_EQ(t.world.events.count("FundingGap"), 1u);
}

TEST_F(RepoWorld, MarkTickZeroAndMinusOnePercent) {
  t.treasuries(lender, SecurityClass::Bill, Amount{100'000'00});
  const std::string before = snapshot(t.world).to_json();
  EXPECT_TRUE(mark_treasuries(t.world, t.book, SecurityClass::Bill, Fraction::zero()).empty());
  EXPECT_EQ(snapshot(t.world).to_json(), before);
  const Amount a0 = t.world.sheet(lender).total_assets();
  mark_treasuries(t.world, t.book, SecurityClass::Bill, -Fraction::bp(100));
  EXPECT_EQ(t.world.sheet(lender).total_assets() - a0, Amount{-1'000'00});
}

TEST(Repo, MarginCallOnePerUnderMarginedTermRepo) {
  TestWorld t;
  const AgentId b = t.bank("b", Amount{100'000'00});
  const AgentId l = t.depositor(AgentKind::Issuer, "l", b, Amount{100'000'00});
  const AgentId d1 = t.dealer("d1", Amount{0});
  const AgentId d2 = t.dealer("d2", Amount{0});
  t.treasuries(d1, SecurityClass::Long, Amount{10'200'00});
  t.treasuries(d2, SecurityClass::Long, Amount{50'000'00});
  RepoBook book;
  RepoTerms term;
  term.term_days = 7;
  term.long_share = Fraction::one();
  open_reverse_repo(t.world, book, l, d1, Amount{10'000'00}, term);
  open_reverse_repo(t.world, book, l, d2, Amount{10'000'00}, term);
  RepoTerms overnight = term;
  overnight.term_days = 1;
  open_reverse_repo(t.world, book, l, d2, Amount{10'000'00}, overnight);
  const auto calls = mark_treasuries(t.world, book, SecurityClass::Long, -Fraction::bp(300));
  ASSERT_EQ(calls.size(), 2u);
  EXPECT_EQ(t.world.events.count("MarginCall"), 2u);
  for (const auto& c : calls) EXPECT_EQ(c.met, c.borrower == d2);
  EXPECT_TRUE(audit(t.world).ok());
}

TEST(Bills, GeniusMaturityLimit) {
  TreasuryBill ok{Amount{100}, 93, Fraction::one(), true};
  TreasuryBill too_long{Amount{100}, 94, Fraction::one(), true};
  EXPECT_NO_THROW(check_bill(ok, 0, true));
  EXPECT_THROW(check_bill(too_long, 0, true), InstrumentError);
  EXPECT_NO_THROW(check_bill(too_long, 0, false));
  TreasuryBill matured{Amount{100}, 4, Fraction::one(), true};
  EXPECT_THROW(check_bill(matured, 5, false), InstrumentError);
}

TEST(Repo, SelectCollateralSubstitutesWhenShort) {
  const std::map<SecurityClass, Amount> avail{{SecurityClass::Long, Amount{10'00}}, {SecurityClass::Bill, Amount{500'00}}};
  const auto faces = select_collateral(avail, PriceMarks{}, Amount{100'00}, Fraction::pct_hundredths(7500));
  EXPECT_EQ(faces.at(SecurityClass::Long), Amount{10'00});
  EXPECT_EQ(faces.at(SecurityClass::Bill), Amount{90'00});
}
