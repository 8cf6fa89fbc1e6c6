#pragma once

// Dealer-intermediated secondary Treasury market. Dealers absorb sales up to
// their SLR headroom; fills settle T+1 and are funded by private repo from the
// cash lenders or, when enabled, by the standing repo facility.

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "parsim/analytics.hpp"
#include "parsim/instruments.hpp"
#include "parsim/ledger.hpp"

namespace parsim {

struct VolumeDecomposition {
  Amount seller;
  Amount retention;
  Amount interdealer;
  Amount buyer;
  Amount gross;
};

/// Volumes along a seller -> dealer(s) -> buyer chain. Each inter-dealer hop
/// carries the flow not retained by the first dealer.
VolumeDecomposition decompose(Amount seller, Amount retention, int chain_length = 2);

struct DealerChain {
  std::vector<AgentId> dealers;
  Fraction retention_frac;

  int length() const { return static_cast<int>(dealers.size()); }
  VolumeDecomposition decompose(Amount seller) const;
};

/// Default retention: 72.5 of 216 retained by the first dealer.
inline constexpr Fraction kDefaultRetention = Fraction::from_micros(335'648);

struct MarketParams {
  Fraction impact_coeff = Fraction::one();
  Amount depth = Amount::usd(1'000'000);
  Fraction max_dislocation = Fraction::pct_hundredths(1000);
  /// Long-dated impact relative to bills; at least one.
  Fraction long_impact_multiplier = Fraction::from_micros(2'000'000);
  bool flight_to_safety = false;
  /// Daily bill price gain while long-dated sales go unfilled under flight to safety.
  Fraction flight_bid;
  /// Share of the gap to the reference price closed per calm day.
  Fraction mark_reversion = Fraction::pct_hundredths(5000);
  int chain_length = 2;
  Fraction retention_frac = kDefaultRetention;
  /// Share of a funding gap the borrower refinances with a new repo counterparty.
  Fraction replacement_frac;
  bool srf_enabled = false;
  SlrParams slr;
};

struct DealerProfile {
  AgentId id;
  Amount exposures;
  bool gsib = true;
  /// Daily cap on privately sourced reserves; empty means unconstrained.
  std::optional<Amount> reserve_access;
  bool market_maker = true;
  /// Extra headroom granted by an eSLR reform.
  Amount extra_headroom;
};

SlrReport dealer_slr(const LedgerWorld& world, const DealerProfile& d, const SlrParams& params);
Amount dealer_headroom(const LedgerWorld& world, const DealerProfile& d, const SlrParams& params);

/// Decline in price for flow beyond capacity; zero for bills under flight to safety.
Fraction price_impact(Amount excess_flow, const MarketParams& params, SecurityClass cls);

struct SaleOrder {
  std::uint64_t id = 0;
  AgentId seller;
  SecurityClass cls = SecurityClass::Bill;
  Amount face;
  Amount filled_face;
  int submitted_day = 0;
  std::optional<std::uint64_t> gap_repo;

  Amount open_face() const { return face - filled_face; }
};

struct Fill {
  std::uint64_t order_id = 0;
  AgentId seller;
  AgentId dealer;
  SecurityClass cls = SecurityClass::Bill;
  Amount face;
  Amount value;
  Amount srf;
  int trade_day = 0;
  int settle_day = 0;
  std::optional<std::uint64_t> gap_repo;
};

struct FillReport {
  std::uint64_t order_id = 0;
  Amount requested_face;
  Amount filled_face;
  Amount filled_value;
  Amount unfilled_face;
  std::vector<Fill> fills;
};

struct DealerCapacity {
  AgentId id;
  Amount headroom;
  Amount private_room;
  Amount srf_room;
  Amount cap;
};

struct ClassStats {
  Amount seller_flow;
  Amount fills;
  Amount unfilled;
};

struct ClearingReport {
  Amount capacity;
  Amount srf_draws;
  std::map<SecurityClass, ClassStats> by_class;
  std::vector<FillReport> reports;
  VolumeDecomposition chain;
};

struct PriceUpdate {
  PriceMarks before;
  PriceMarks after;
  std::vector<MarginCall> margin_calls;
};

struct EarlyRepayment {
  std::uint64_t repo_id = 0;
  AgentId lender;
  Amount amount;
};

struct GapPlan {
  Amount replacement;
  Amount long_face;
  Amount bill_face;
  std::vector<std::uint64_t> orders;
};

class Market {
 public:
  Market() = default;
  Market(MarketParams params, std::vector<DealerProfile> dealers, std::vector<AgentId> cash_lenders);

  const MarketParams& params() const { return params_; }
  MarketParams& params_mut() { return params_; }
  const std::vector<DealerProfile>& dealers() const { return dealers_; }
  const DealerProfile* dealer(AgentId id) const;

  /// Queues a sale of `face` for the next clearing. Returns the order id.
  std::uint64_t submit(const LedgerWorld& world, AgentId seller, SecurityClass cls, Amount face,
                       std::optional<std::uint64_t> gap_repo = std::nullopt);
  void cancel(std::uint64_t order_id);
  const std::vector<SaleOrder>& orders() const { return orders_; }

  std::vector<DealerCapacity> dealer_capacity(const LedgerWorld& world) const;
  Amount capacity(const LedgerWorld& world) const;

  /// Fills queued orders in (seller, submission) order, pro-rata across dealers.
  ClearingReport clear(LedgerWorld& world);
  const ClearingReport& last_clearing() const { return last_; }

  /// Settles every fill whose T+1 leg falls on `day`.
  void settle_due(LedgerWorld& world, RepoBook& book, int day);

  /// Replacement repo plus a residual sale split across long and bill collateral.
  GapPlan funding_gap_liquidation(LedgerWorld& world, const FundingGap& gap);
  bool has_gap(std::uint64_t repo_id) const { return gaps_.contains(repo_id); }
  Amount gap_outstanding(std::uint64_t repo_id) const;
  /// Second leg of a repo with an open funding gap. Returns principal repaid.
  Amount settle_gap(LedgerWorld& world, RepoBook& book, std::uint64_t repo_id, int today, Fraction roll_rate);

  /// Repo principal repaid early out of gap sale proceeds since the last call.
  std::vector<EarlyRepayment> take_early_repayments();

  /// Borrows from the cash lenders so a dealer can pay out without touching its base reserves.
  Amount fund_dealer(LedgerWorld& world, AgentId dealer, Amount amount);
  /// Uses reserves above a dealer's base to repay private funding.
  void sweep(LedgerWorld& world);
  void set_base_reserves(AgentId dealer, Amount base) { base_reserves_[dealer] = base; }

  PriceUpdate update_marks(LedgerWorld& world, RepoBook& book);

  /// Face still owed by open orders plus filled but unsettled face.
  Amount pending_face(AgentId seller, SecurityClass cls) const;
  /// Expected proceeds of open orders and unsettled fills at current marks.
  Amount pending_proceeds(const LedgerWorld& world, AgentId seller) const;

  void begin_day(int day);

 private:
  struct GapState {
    FundingGap gap;
    Amount replacement;
    Amount proceeds;
    std::vector<std::uint64_t> orders;
  };

  void settle_gap_fill(LedgerWorld& world, RepoBook& book, const Fill& f, RepoPosition& pos,
                       std::map<std::uint64_t, GapState>::iterator gap);
  void pay_from_dealer(LedgerWorld& world, AgentId dealer, AgentId to, Amount amount, Amount srf_cash);
  std::vector<std::pair<AgentId, Amount>> funding_postings(const LedgerWorld& world, AgentId dealer, Amount amount,
                                                           PostingBatch& b) const;
  static void emit_funding(LedgerWorld& world, AgentId dealer, const std::vector<std::pair<AgentId, Amount>>& takes);

  MarketParams params_;
  std::vector<DealerProfile> dealers_;
  std::vector<AgentId> cash_lenders_;
  std::vector<SaleOrder> orders_;
  std::vector<Fill> unsettled_;
  std::map<std::uint64_t, GapState> gaps_;
  std::map<AgentId, Amount> base_reserves_;
  std::map<AgentId, Amount> srf_cash_;
  std::vector<EarlyRepayment> early_repaid_;
  std::map<AgentId, Amount> committed_;
  std::map<AgentId, Amount> funding_used_;
  std::map<SecurityClass, Amount> seller_flow_;
  ClearingReport last_;
  std::uint64_t next_order_ = 1;
  int day_ = 0;
};

/// Convenience: queue one sale and clear immediately.
FillReport submit_sale(Market& market, LedgerWorld& world, AgentId seller, Amount face, SecurityClass cls);

}  // namespace parsim
