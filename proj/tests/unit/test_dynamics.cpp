#include <gtest/gtest.h>

#include "parsim/analytics.hpp"
#include "parsim/dynamics.hpp"
#include "support/gen.hpp"
#include "support/world.hpp"

using namespace parsim;
using namespace parsim::testing;

namespace {

ConfidenceState at_bp(std::int64_t bp, int delay_age = 0) {
  ConfidenceState c;
  c.secondary_price = Fraction::one() - Fraction::bp(bp);
  c.pending_delay_age = delay_age;
  return c;
}

}  // namespace

TEST(Demand, ThresholdBoundary) {
  RunModel m;
  EXPECT_EQ(redemption_demand(m, at_bp(299), Amount{1'000'000'00}), Amount{1'000'00});
  EXPECT_EQ(m.state, Sensitivity::Insensitive);
  EXPECT_EQ(redemption_demand(m, at_bp(300), Amount{1'000'000'00}), Amount{50'000'00});
  EXPECT_EQ(m.state, Sensitivity::Sensitive);
}

TEST(Demand, DelayAgeTriggers) {
  RunModel m;
  EXPECT_FALSE(m.triggered(at_bp(0, 1)));
  EXPECT_TRUE(m.triggered(at_bp(0, 2)));
}

TEST(Demand, PremiumCountsAsDeviation) {
  RunModel m;
  ConfidenceState c;
  c.secondary_price = Fraction::one() + Fraction::bp(300);
  EXPECT_TRUE(m.triggered(c));
}

TEST(Demand, StaysShiftedUntilRecovery) {
  RunModel m;
  redemption_demand(m, at_bp(400), Amount{100'00});
  const ConfidenceState calm = at_bp(0);
  for (int d = 1; d < m.recovery_days; ++d) {
    EXPECT_FALSE(m.end_of_day(calm));
    EXPECT_EQ(m.rate(calm), m.shifted_rate);
  }
  EXPECT_TRUE(m.end_of_day(calm));
  EXPECT_EQ(m.state, Sensitivity::Insensitive);
  EXPECT_EQ(m.rate(calm), m.baseline_rate);
}

TEST(Demand, DisturbanceResetsCalmCount) {
  RunModel m;
  m.state = Sensitivity::Sensitive;
  for (int d = 0; d < 4; ++d) m.end_of_day(at_bp(0));
  m.end_of_day(at_bp(10));
  for (int d = 0; d < 4; ++d) EXPECT_FALSE(m.end_of_day(at_bp(0)));
  EXPECT_TRUE(m.end_of_day(at_bp(0)));
}

TEST(Demand, ValidateRejectsInvertedRates) {
  RunModel m;
  m.shifted_rate = m.baseline_rate;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  RunModel ok;
  EXPECT_NO_THROW(ok.validate());
}

TEST(DemandProperty, RateMonotoneInDeviation) {
  for_all(1000, 71, [](Gen& g, int) {
    RunModel m;
    m.form = g.coin() ? RegimeForm::Step : RegimeForm::Smooth;
    m.state = g.coin() ? Sensitivity::Sensitive : Sensitivity::Insensitive;
    const std::int64_t a = g.range(0, 1000);
    const std::int64_t b = g.range(0, 1000);
    const Fraction ra = m.rate(at_bp(std::min(a, b)));
    const Fraction rb = m.rate(at_bp(std::max(a, b)));
    EXPECT_LE(ra, rb);
    EXPECT_GE(ra, m.baseline_rate);
    EXPECT_LE(rb, m.shifted_rate);
  });
}

TEST(Price, DirectAccessTracksPressure) {
  PriceInputs in;
  in.coins = Amount{1'000'00};
  in.unfilled = Amount{10'00};
  const auto c = update_secondary_price(ConfidenceState{}, in);
  EXPECT_EQ(c.secondary_price, Fraction::one() - Fraction::bp(100));
  in.unfilled = Amount{0};
  EXPECT_EQ(update_secondary_price(c, in).secondary_price, Fraction::one());
}

TEST(Price, IntermediatedRevertsGradually) {
  PriceInputs in;
  in.mode = AccessMode::Intermediated;
  in.coins = Amount{1'000'00};
  const auto c = update_secondary_price(at_bp(200), in);
  EXPECT_EQ(c.secondary_price, Fraction::one() - Fraction::bp(100));
  const auto snapped = update_secondary_price(at_bp(1), in);
  EXPECT_EQ(snapped.secondary_price, Fraction::one());
}

TEST(Price, ShockCapsPrice) {
  PriceInputs in;
  in.coins = Amount{1'000'00};
  in.shock_effect = Fraction::bp(50);
  EXPECT_EQ(update_secondary_price(ConfidenceState{}, in).secondary_price, Fraction::one() - Fraction::bp(50));
}

TEST(Price, FloorHolds) {
  PriceInputs in;
  in.coins = Amount{1'000'00};
  in.unfilled = Amount{1'000'00};
  in.shock_effect = Fraction::pct_hundredths(9900);
  const PriceParams p;
  EXPECT_EQ(update_secondary_price(ConfidenceState{}, in, p).secondary_price, p.floor);
}

TEST(Price, InterventionLiftsIntermediatedPrice) {
  PriceInputs in;
  in.mode = AccessMode::Intermediated;
  in.coins = Amount{1'000'00};
  in.intervention_target = Fraction::one() - Fraction::bp(50);
  in.intervention_fill = Fraction::one();
  PriceParams p;
  p.reversion = Fraction::zero();
  EXPECT_EQ(update_secondary_price(at_bp(300), in, p).secondary_price, Fraction::one() - Fraction::bp(50));
}

TEST(AttackBand, Ranges) {
  EXPECT_EQ(attack_band(SystemicBand::High).first, Fraction::pct_hundredths(1350));
  EXPECT_EQ(attack_band(SystemicBand::High).second, Fraction::pct_hundredths(3000));
  EXPECT_EQ(attack_band(SystemicBand::Low).first, Fraction::pct_hundredths(350));
}

TEST(AttackBandProperty, DrawsStayInBand) {
  Rng rng(99);
  for (SystemicBand b : {SystemicBand::High, SystemicBand::Medium, SystemicBand::Low}) {
    const auto [lo, hi] = attack_band(b);
    for (int i = 0; i < 2000; ++i) {
      const Fraction f = attack_magnitude(b, rng);
      EXPECT_GE(f, lo);
      EXPECT_LE(f, hi);
    }
  }
}

TEST(Rng, SameSeedSameDraws) {
  Rng a(7);
  Rng b(7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.below(1000), b.below(1000));
}

TEST(AttackIncentive, Ratio) {
  EXPECT_EQ(attack_incentive_ratio(Amount{1'000'00}, Amount{250'00}), Fraction::from_micros(4'000'000));
  EXPECT_THROW(attack_incentive_ratio(Amount{1}, Amount{0}), std::invalid_argument);
}

TEST(ShockParse, RejectsUnknown) {
  EXPECT_EQ(parse_shock_class("CorrelatedLiveness"), ShockClass::CorrelatedLiveness);
  try {
    parse_shock_class("Meteor");
    FAIL();
  } catch (const ShockError& e) {
    EXPECT_EQ(e.code(), ShockErrc::UnknownShockClass);
  }
}

namespace {

struct ShockWorld {
  TestWorld t;
  AgentId bank;
  std::vector<ShockTarget> targets;
  AgentId holder;
  AgentId attacker;

  ShockWorld() {
    bank = t.bank("bank", Amount{0});
    holder = t.depositor(AgentKind::Holder, "holder", bank, Amount{0});
    attacker = t.depositor(AgentKind::Holder, "attacker", bank, Amount{0});
    add("a", {"eth", "sol"});
    add("b", {"eth"});
    add("c", {"tron"});
  }

  void add(const std::string& name, std::vector<std::string> chains) {
    const AgentId i = t.depositor(AgentKind::Issuer, name, bank, Amount{105'00});
    t.claim(holder, i, InstrumentKind::Stablecoin, Amount{100'00});
    targets.push_back({i, name, std::move(chains)});
  }
};

}  // namespace

TEST(Shock, CorrelatedLivenessFansOutAcrossChain) {
  ShockWorld w;
  ShockSpec s;
  s.id = "outage";
  s.cls = ShockClass::CorrelatedLiveness;
  s.chain = "eth";
  s.duration = 2;
  w.t.world.set_day(3);
  Rng rng(1);
  const auto e = apply_shock(s, w.t.world, w.targets, std::nullopt, rng);
  ASSERT_EQ(e.issuers.size(), 2u);
  EXPECT_TRUE(e.blocks(w.targets[0].issuer, 3));
  EXPECT_TRUE(e.blocks(w.targets[1].issuer, 4));
  EXPECT_FALSE(e.blocks(w.targets[1].issuer, 5));
  EXPECT_FALSE(e.blocks(w.targets[2].issuer, 3));
}

TEST(Shock, SingleIssuerLiveness) {
  ShockWorld w;
  ShockSpec s;
  s.cls = ShockClass::LivenessFault;
  s.issuer = "c";
  Rng rng(1);
  const auto e = apply_shock(s, w.t.world, w.targets, std::nullopt, rng);
  ASSERT_EQ(e.issuers.size(), 1u);
  EXPECT_EQ(e.issuers[0], w.targets[2].issuer);
  EXPECT_EQ(e.end_day, e.start_day);
}

TEST(Shock, NoTarget) {
  ShockWorld w;
  ShockSpec s;
  s.chain = "nowhere";
  Rng rng(1);
  EXPECT_THROW(apply_shock(s, w.t.world, w.targets, std::nullopt, rng), ShockError);
}

TEST(Shock, UncontrolledSupplyCutsLeverageAndBurns) {
  ShockWorld w;
  const AgentId a = w.targets[0].issuer;
  const auto& sheet = w.t.world.sheet(a);
  EXPECT_EQ(leverage_ratio(sheet.total_assets(), coins_outstanding(w.t.world, a)).band, FdiciaBand::Adequate);

  ShockSpec s;
  s.cls = ShockClass::UncontrolledSupply;
  s.issuer = "a";
  s.duration = 1;
  Rng rng(1);
  auto e = apply_shock(s, w.t.world, w.targets, w.attacker, rng);
  EXPECT_EQ(e.minted.at(a), Amount{10'00});
  EXPECT_EQ(coins_outstanding(w.t.world, a), Amount{110'00});
  EXPECT_EQ(e.price_effect, kDefaultSupplyPriceEffect);
  const auto lev = leverage_ratio(sheet.total_assets(), coins_outstanding(w.t.world, a));
  EXPECT_LT(lev.ratio, Fraction::zero());
  EXPECT_EQ(lev.band, FdiciaBand::Critical);
  EXPECT_TRUE(audit(w.t.world).ok());

  expire_shock(e, w.t.world);
  expire_shock(e, w.t.world);
  EXPECT_EQ(coins_outstanding(w.t.world, a), Amount{100'00});
  EXPECT_EQ(w.t.world.events.count("Burn"), 1u);
  EXPECT_TRUE(audit(w.t.world).ok());
}

TEST(Shock, ConfidenceOnlySamplesBand) {
  ShockWorld w;
  ShockSpec s;
  s.cls = ShockClass::ConfidenceOnly;
  s.chain = "eth";
  s.systemic = SystemicBand::Low;
  Rng rng(5);
  const auto e = apply_shock(s, w.t.world, w.targets, std::nullopt, rng);
  EXPECT_GE(e.price_effect, Fraction::pct_hundredths(350));
  EXPECT_LE(e.price_effect, Fraction::pct_hundredths(750));
  EXPECT_FALSE(e.blocks(e.issuers[0], e.start_day));
}
