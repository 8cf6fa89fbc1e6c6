#pragma once

// Issuer redemption and mint desks: funding route selection, multi-day
// settlement plans, the FIFO redemption queue, and par-defense interventions.

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "parsim/instruments.hpp"
#include "parsim/ledger.hpp"
#include "parsim/market.hpp"
#include "parsim/srf.hpp"

namespace parsim {

enum class AccessMode : std::uint8_t { Direct, Intermediated };
enum class RedemptionRoute : std::uint8_t { Direct, ViaIntermediary };
enum class Funding : std::uint8_t { FromDeposits, SellTreasuries, RepoNonRollover };
enum class ParMode : std::uint8_t { RigorousFixed, Corridor, BestEffort };

std::string_view to_string(AccessMode m);
std::string_view to_string(Funding f);
std::string_view to_string(ParMode m);

enum class SettlementErrc : std::uint8_t { IneligibleRedeemer, MintDeclined, LegFailed, InvalidRequest };

/// Why a settlement leg could not complete.
enum class LegFailure : std::uint8_t { None, DealerCapacity, AwaitingFunds, Liveness, Insolvent };

std::string_view to_string(LegFailure f);

class SettlementError : public std::runtime_error {
 public:
  SettlementError(SettlementErrc code, const std::string& what, LegFailure cause = LegFailure::None)
      : std::runtime_error(what), code_(code), cause_(cause) {}
  SettlementErrc code() const { return code_; }
  LegFailure cause() const { return cause_; }

 private:
  SettlementErrc code_;
  LegFailure cause_;
};

struct ParPolicy {
  ParMode mode = ParMode::RigorousFixed;
  int corridor_bp = 50;
  /// Scales the intervention size relative to coins * price gap.
  Fraction supply_response = Fraction::one();
};

struct RedemptionRequest {
  std::uint64_t id = 0;
  AgentId holder;
  AgentId issuer;
  Amount amount;
  Clock submitted;
  RedemptionRoute route = RedemptionRoute::Direct;
};

struct SaleIntent {
  SecurityClass cls = SecurityClass::Bill;
  Amount face;
};

struct RepoRecall {
  std::uint64_t repo_id = 0;
  Amount amount;
};

struct PlanLeg {
  int day_offset = 0;
  std::string label;
  PostingBatch postings;
  std::vector<SaleIntent> sales;
  std::vector<RepoRecall> recalls;
};

struct SettlementPlan {
  Funding funding = Funding::FromDeposits;
  std::vector<PlanLeg> legs;
  /// Cash the plan must raise before its final leg can pay out.
  Amount to_raise;

  int horizon() const { return legs.empty() ? 0 : legs.back().day_offset; }
};

struct QueuedRedemption {
  RedemptionRequest request;
  SettlementPlan plan;
  int due_day = 0;
  bool delayed = false;
  LegFailure last_failure = LegFailure::None;

  /// Days late: a request that misses its due day is one day late at that day's close.
  int age(int today) const { return delayed ? today - due_day + 1 : 0; }
};

struct Completion {
  RedemptionRequest request;
  int day = 0;
  int delay_days = 0;
};

struct QueueStep {
  std::vector<Completion> completed;
  /// Requests that became delayed this step.
  std::vector<std::uint64_t> newly_delayed;
  Amount newly_delayed_amount;
  LegFailure blocked_by = LegFailure::None;
};

struct IssuerDesk {
  AgentId issuer;
  AccessMode access = AccessMode::Direct;
  std::set<AgentId> eligible;
  ParPolicy policy;
  bool genius_compliant = true;
  /// Share of mint proceeds invested in bills on the mint day.
  Fraction mint_bill_share;
  int mint_bill_maturity_days = 30;
  bool decline_negative_carry = true;
  Fraction treasury_yield;
  std::vector<std::string> chains;
  bool liveness_blocked = false;

  std::deque<QueuedRedemption> queue;
  std::map<std::uint64_t, Amount> recalled;
  std::uint64_t next_request = 1;

  Amount committed() const;
  Amount pending_for(AgentId holder) const;
  Amount delayed_amount() const;
  int max_delay_age(int today) const;
  bool may_redeem_directly(AgentId holder) const;
};

/// Chooses the funding route for a redemption from the desk's current state.
SettlementPlan plan_redemption(const IssuerDesk& desk, const RedemptionRequest& req, const LedgerWorld& world,
                               const Market& market, const RepoBook& book);

/// Starts a plan: submits its sales and repo recalls, queues the final leg and
/// pays out whatever is already due.
QueueStep execute_plan(IssuerDesk& desk, const RedemptionRequest& req, SettlementPlan plan, LedgerWorld& world,
                       Market& market, RepoBook& book);

RedemptionRequest make_request(IssuerDesk& desk, const LedgerWorld& world, AgentId holder, Amount amount,
                               RedemptionRoute route = RedemptionRoute::Direct);

/// Pays out due requests strictly first in, first out. A failed head blocks the rest.
QueueStep process_queue(IssuerDesk& desk, LedgerWorld& world, const Market& market, int today);

/// Raises more cash when queued requests exceed cash plus incoming proceeds.
void top_up_funding(IssuerDesk& desk, LedgerWorld& world, Market& market, RepoBook& book);

SettlementPlan plan_mint(const IssuerDesk& desk, AgentId buyer, Amount amount, const LedgerWorld& world,
                         Fraction secondary_price, std::optional<AgentId> bill_seller = std::nullopt);
void execute_mint(const SettlementPlan& plan, LedgerWorld& world);

enum class ActionKind : std::uint8_t { Buy, Mint };

struct IssuerAction {
  ActionKind kind = ActionKind::Buy;
  Amount coins;
  Fraction target;
};

/// Open-market action that restores the policy's target price.
std::vector<IssuerAction> intervene(const ParPolicy& policy, Fraction price, Amount coins);

/// Carries out an action against counterparties in order, each up to its coin
/// limit. Returns the coins traded.
Amount execute_intervention(IssuerDesk& desk, const IssuerAction& action, LedgerWorld& world,
                            const std::vector<std::pair<AgentId, Amount>>& counterparties);

Amount coins_outstanding(const LedgerWorld& world, AgentId issuer);
Amount coins_held(const LedgerWorld& world, AgentId holder, AgentId issuer);

}  // namespace parsim
