#include <gtest/gtest.h>

#include "parsim/ledger.hpp"
#include "support/gen.hpp"
#include "support/world.hpp"

using namespace parsim;
using namespace parsim::testing;

namespace {

struct FourAgents : ::testing::Test {
  TestWorld t;
  AgentId bank_a, bank_b, holder, issuer;

  void SetUp() override {
    bank_a = t.bank("bank_a", Amount{500'000'00});
    bank_b = t.bank("bank_b", Amount{500'000'00});
    holder = t.depositor(AgentKind::Holder, "holder", bank_a, Amount{10'000'00});
    issuer = t.depositor(AgentKind::Issuer, "issuer", bank_b, Amount{0});
  }
};

Amount fed_reserve_liability(const LedgerWorld& w) {
  return w.sheet(kFed).sum(Side::Liability, InstrumentKind::Reserves);
}

}  // namespace

TEST_F(FourAgents, ZeroTransferLeavesWorldUnchanged) {
  const std::string before = snapshot(t.world).to_json();
  t.world.post_transfer(bank_a, bank_b, Instrument::reserves(), Amount{0});
  EXPECT_EQ(snapshot(t.world).to_json(), before);
}

TEST_F(FourAgents, ReserveTransferConservesFedLiability) {
  const Amount fed = fed_reserve_liability(t.world);
  const Amount a0 = t.world.sheet(bank_a).sum(Side::Asset, InstrumentKind::Reserves);
  const Amount b0 = t.world.sheet(bank_b).sum(Side::Asset, InstrumentKind::Reserves);
  t.world.post_transfer(bank_a, bank_b, Instrument::reserves(), Amount{100'00});
  EXPECT_EQ(t.world.sheet(bank_a).sum(Side::Asset, InstrumentKind::Reserves), a0 - Amount{100'00});
  EXPECT_EQ(t.world.sheet(bank_b).sum(Side::Asset, InstrumentKind::Reserves), b0 + Amount{100'00});
  EXPECT_EQ(fed_reserve_liability(t.world), fed);
  EXPECT_TRUE(audit(t.world).ok());
}

TEST_F(FourAgents, InterbankPaymentMovesReservesNotAggregateDeposits) {
  const Amount deposits = sum_bank_deposits(t.world);
  const Amount ra = t.world.sheet(bank_a).sum(Side::Asset, InstrumentKind::Reserves);
  t.world.pay(holder, issuer, Amount{1'000'00});
  EXPECT_EQ(sum_bank_deposits(t.world), deposits);
  EXPECT_EQ(t.world.sheet(bank_a).sum(Side::Asset, InstrumentKind::Reserves), ra - Amount{1'000'00});
  EXPECT_EQ(t.deposits(issuer), Amount{1'000'00});
  EXPECT_EQ(t.deposits(holder), Amount{9'000'00});
  EXPECT_TRUE(audit(t.world).ok());
}

TEST_F(FourAgents, InsufficientPositionIsAtomic) {
  const std::string before = snapshot(t.world).to_json();
  try {
    t.world.pay(holder, issuer, Amount{10'000'01});
    FAIL() << "expected InsufficientPosition";
  } catch (const LedgerError& e) {
    EXPECT_EQ(e.code(), LedgerErrc::InsufficientPosition);
  }
  EXPECT_EQ(snapshot(t.world).to_json(), before);
}

TEST_F(FourAgents, UnknownAgentRejected) {
  const AgentId ghost{AgentKind::Holder, 99};
  try {
    t.world.pay(holder, ghost, Amount{1});
    FAIL() << "expected UnknownAgent";
  } catch (const LedgerError& e) {
    EXPECT_EQ(e.code(), LedgerErrc::UnknownAgent);
  }
}

TEST_F(FourAgents, FreshWorldAuditPasses) {
  const AuditReport r = audit(t.world);
  EXPECT_TRUE(r.ok()) << r.to_string();
  for (const char* name : {"DoubleEntry", "NonNegative", "ReserveConservation", "DepositMatching", "ClaimMatching"}) {
    ASSERT_NE(r.find(name), nullptr) << name;
  }
}

TEST_F(FourAgents, CorruptedDepositNamesAgent) {
  t.world.seed(holder, Side::Asset, {InstrumentKind::Deposit, SecurityClass::None, bank_b}, Amount{5});
  const AuditReport r = audit(t.world);
  EXPECT_FALSE(r.ok());
  const AuditCheck* c = r.find("DepositMatching");
  ASSERT_NE(c, nullptr);
  EXPECT_FALSE(c->passed);
  ASSERT_TRUE(c->first_violator.has_value());
  EXPECT_EQ(*c->first_violator, holder);
}

TEST_F(FourAgents, SnapshotIsImmutableAndStable) {
  const WorldSnapshot s1 = snapshot(t.world);
  const WorldSnapshot s2 = snapshot(t.world);
  EXPECT_EQ(s1.to_json(), s2.to_json());
  const Amount eq = s1.find(holder)->equity;
  t.world.pay(holder, issuer, Amount{2'500'00});
  EXPECT_EQ(s1.find(holder)->equity, eq);
  EXPECT_NE(snapshot(t.world).to_json(), s1.to_json());
}

TEST_F(FourAgents, RemarkKeepsIdentity) {
  t.treasuries(holder, SecurityClass::Long, Amount{1'000'00});
  t.world.set_mark(SecurityClass::Long, Fraction::from_micros(990'000));
  const auto& s = t.world.sheet(holder);
  EXPECT_EQ(s.total_assets(), s.recompute_assets(t.world.marks()));
  EXPECT_EQ(s.total_assets(), Amount{10'000'00 + 990'00});
  EXPECT_TRUE(audit(t.world).ok());
}

TEST(LedgerIds, RoundTrip) {
  const AgentId a{AgentKind::TreasuryBuyer, 7};
  EXPECT_EQ(parse_agent_id(a.to_string()), a);
  EXPECT_FALSE(parse_agent_id("Nope#1").has_value());
}

TEST(LedgerEvents, JsonLineIsStable) {
  LedgerWorld w;
  w.set_day(3);
  w.emit("Test").with("amount", Amount{12}).with("flag", true).with("who", "x");
  const std::string line = w.events.entries().back().to_json();
  EXPECT_NE(line.find("\"type\":\"Test\""), std::string::npos);
  EXPECT_NE(line.find("\"day\":3"), std::string::npos);
  EXPECT_NE(line.find("\"amount\":12"), std::string::npos);
}

TEST(LedgerProperty, RandomTransfersKeepEveryInvariant) {
  for_all(200, 21, [](Gen& g, int) {
    TestWorld t;
    std::vector<AgentId> banks;
    for (int i = 0; i < 3; ++i) banks.push_back(t.bank("b" + std::to_string(i), g.cents(0, 1'000'000)));
    std::vector<AgentId> people;
    for (int i = 0; i < 5; ++i) {
      const AgentId p = t.depositor(AgentKind::Holder, "h" + std::to_string(i), g.pick(banks), g.cents(0, 100'000));
      t.treasuries(p, SecurityClass::Bill, g.cents(0, 50'000));
      people.push_back(p);
    }
    const Amount fed0 = fed_reserve_liability(t.world);
    const Amount dep0 = sum_bank_deposits(t.world);
    for (int step = 0; step < 40; ++step) {
      const AgentId from = g.pick(people);
      const AgentId to = g.pick(people);
      const std::string before = snapshot(t.world).to_json();
      try {
        if (g.coin()) {
          t.world.pay(from, to, g.cents(0, 120'000));
        } else {
          t.world.post_transfer(from, to, Instrument::treasury(SecurityClass::Bill), g.cents(0, 60'000));
        }
      } catch (const LedgerError&) {
        ASSERT_EQ(snapshot(t.world).to_json(), before);
      }
      const AuditReport r = audit(t.world);
      ASSERT_TRUE(r.ok()) << r.to_string();
      ASSERT_EQ(fed_reserve_liability(t.world), fed0);
      ASSERT_EQ(sum_bank_deposits(t.world), dep0);
      for (const auto& [id, s] : t.world.agents()) ASSERT_EQ(s.equity(), s.total_assets() - s.total_liabilities());
    }
  });
}
