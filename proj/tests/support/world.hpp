#pragma once

// Small hand-built worlds for unit tests.

#include <string>

#include "parsim/ledger.hpp"
#include "parsim/market.hpp"
#include "parsim/settlement.hpp"

namespace parsim::testing {

inline PositionKey tkey(SecurityClass cls) { return {InstrumentKind::Treasury, cls, std::nullopt}; }

struct TestWorld {
  LedgerWorld world;
  RepoBook book;

  AgentId bank(const std::string& name, Amount reserves) {
    const AgentId b = world.add_agent(AgentKind::Bank, name);
    claim(b, kFed, InstrumentKind::Reserves, reserves);
    return b;
  }

  /// Agent with a deposit account at `bank`.
  AgentId depositor(AgentKind kind, const std::string& name, AgentId bank, Amount deposits) {
    const AgentId a = world.add_agent(kind, name);
    world.sheet_mut(a).home_bank = bank;
    claim(a, bank, InstrumentKind::Deposit, deposits);
    return a;
  }

  AgentId dealer(const std::string& name, Amount reserves) {
    const AgentId d = world.add_agent(AgentKind::BrokerDealer, name);
    world.sheet_mut(d).reserve_account = true;
    claim(d, kFed, InstrumentKind::Reserves, reserves);
    return d;
  }

  void claim(AgentId creditor, AgentId debtor, InstrumentKind kind, Amount amt) {
    if (!amt.is_positive()) return;
    world.seed(creditor, Side::Asset, {kind, SecurityClass::None, debtor}, amt);
    world.seed(debtor, Side::Liability, {kind, SecurityClass::None, creditor}, amt);
  }

  void treasuries(AgentId who, SecurityClass cls, Amount face) {
    if (face.is_positive()) world.seed(who, Side::Asset, tkey(cls), face);
  }

  void other_assets(AgentId who, Amount amt) {
    if (amt.is_positive()) world.seed(who, Side::Asset, {InstrumentKind::OtherAssets, SecurityClass::None, std::nullopt}, amt);
  }

  void other_liabilities(AgentId who, Amount amt) {
    if (amt.is_positive()) {
      world.seed(who, Side::Liability, {InstrumentKind::OtherLiabilities, SecurityClass::None, std::nullopt}, amt);
    }
  }

  Amount deposits(AgentId who) const { return world.spendable(who); }
  Amount face(AgentId who, SecurityClass cls) const { return world.sheet(who).position(Side::Asset, tkey(cls)); }
};

/// Σ of every bank's deposit liabilities, summed independently of the library helper.
inline Amount sum_bank_deposits(const LedgerWorld& w) {
  Amount total;
  for (const auto& [id, sheet] : w.agents()) {
    if (id.kind != AgentKind::Bank) continue;
    for (const auto& [key, amt] : sheet.liabilities()) {
      if (key.kind == InstrumentKind::Deposit) total += amt;
    }
  }
  return total;
}

}  // namespace parsim::testing
