#pragma once

// Backing-asset instruments: Treasury bills, reverse repos with haircuts, and
// the period-by-period progression of an issuer's backing portfolio.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "parsim/ledger.hpp"
#include "parsim/money.hpp"

namespace parsim {

inline constexpr int kGeniusMaxMaturityDays = 93;

enum class InstrumentErrc : std::uint8_t {
  InsufficientCollateral,
  InsufficientCash,
  WrongDay,
  IneligibleMaturity,
  InvalidTerm,
  UnknownRepo,
};

class InstrumentError : public std::runtime_error {
 public:
  InstrumentError(InstrumentErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  InstrumentErrc code() const { return code_; }

 private:
  InstrumentErrc code_;
};

struct TreasuryBill {
  Amount face;
  int maturity_day = 0;
  Fraction market_price = Fraction::one();
  bool on_the_run = true;

  Amount market_value() const { return apply(face, market_price); }
};

/// Throws IneligibleMaturity when a bill is already matured, mispriced, or
/// (for a GENIUS-compliant buyer) longer than 93 days at purchase.
void check_bill(const TreasuryBill& bill, int today, bool genius_compliant);

enum class RepoDirection : std::uint8_t { ReverseRepoLend };

struct RepoPosition {
  std::uint64_t id = 0;
  RepoDirection direction = RepoDirection::ReverseRepoLend;
  AgentId lender;
  AgentId borrower;
  Amount principal;
  Fraction haircut;
  Fraction rate;  // simple interest per day
  int start_day = 0;
  int second_leg_day = 1;
  std::map<SecurityClass, Amount> collateral_face;

  AgentId counterparty() const { return borrower; }
  int term() const { return second_leg_day - start_day; }
  bool overnight() const { return term() == 1; }
  Amount collateral_value(const PriceMarks& marks) const;
  /// Interest owed at the second leg: principal * rate * term, half to even.
  Amount interest() const;
};

/// Collateral required for a principal: principal * (1 + H), rounded up.
Amount required_collateral(Amount principal, Fraction haircut);

/// Collateral faces worth at least `required` out of `available`, preferring
/// the long share and substituting the other class when one runs short.
std::map<SecurityClass, Amount> select_collateral(const std::map<SecurityClass, Amount>& available,
                                                  const PriceMarks& marks, Amount required, Fraction long_share);

/// Lender loss on counterparty default when the collateral price has fallen
/// by `decline` (both haircut and decline measured against the first-leg price).
Amount default_loss(Amount principal, Fraction haircut, Fraction decline);

class RepoBook {
 public:
  RepoPosition& add(RepoPosition pos);
  RepoPosition* find(std::uint64_t id);
  const RepoPosition* find(std::uint64_t id) const;
  void erase(std::uint64_t id);

  const std::map<std::uint64_t, RepoPosition>& positions() const { return positions_; }
  std::map<std::uint64_t, RepoPosition>& positions_mut() { return positions_; }
  std::vector<std::uint64_t> maturing(int day) const;
  std::vector<const RepoPosition*> lent_by(AgentId lender) const;
  std::vector<const RepoPosition*> borrowed_by(AgentId borrower) const;
  Amount principal_lent(AgentId lender) const;

 private:
  std::map<std::uint64_t, RepoPosition> positions_;
  std::uint64_t next_id_ = 1;
};

struct RepoTerms {
  Fraction haircut = Fraction::pct_hundredths(200);
  Fraction rate;
  int term_days = 1;
  /// Share of collateral value pledged in long-dated securities; the rest in bills.
  Fraction long_share = Fraction::pct_hundredths(7500);
};

/// First leg: cash moves lender->borrower, the borrower pledges collateral
/// worth at least principal * (1 + H) at current marks.
const RepoPosition& open_reverse_repo(LedgerWorld& world, RepoBook& book, AgentId lender, AgentId borrower,
                                      Amount principal, const RepoTerms& terms);

struct SettlementOutcome {
  bool performed = true;
  Amount principal_returned;
  Amount interest;
  Amount loss;
  std::map<SecurityClass, Amount> collateral_seized;
};

/// Second leg on its scheduled day. On performance the borrower repays
/// principal plus interest and collateral is released. On default the lender
/// takes the collateral; the reported loss is measured at the given decline.
SettlementOutcome close_or_default_repo(LedgerWorld& world, RepoBook& book, std::uint64_t id, int today,
                                        bool counterparty_performs, Fraction market_decline);

/// Second leg with partial repayment: interest on the full principal is paid,
/// `repay` of principal is returned, and any remainder rolls at `new_rate`
/// with collateral re-marked. Returns the interest paid.
Amount settle_second_leg(LedgerWorld& world, RepoBook& book, std::uint64_t id, int today, Amount repay,
                         Fraction new_rate);

/// Rolls a maturing position in full at a new rate.
const RepoPosition& roll_repo(LedgerWorld& world, RepoBook& book, std::uint64_t id, int today, Fraction new_rate);

/// Unpledges up to `face` of one class ahead of the second leg, so the
/// borrower can deliver it into a sale. Returns the face released.
Amount release_collateral(LedgerWorld& world, RepoBook& book, std::uint64_t id, SecurityClass cls, Amount face);

/// Cash the borrower must find elsewhere when the lender declines to roll.
struct FundingGap {
  std::uint64_t repo_id = 0;
  AgentId borrower;
  AgentId lender;
  Amount amount;
  int due_day = 0;
  Fraction long_share;
};

/// Records the lender's decision not to roll `amount` of a position and emits
/// the FundingGap event the market module consumes.
FundingGap decline_roll(LedgerWorld& world, const RepoPosition& pos, Amount amount);

struct MarginCall {
  std::uint64_t repo_id = 0;
  AgentId borrower;
  Amount shortfall;
  bool met = false;
};

/// Re-marks one security class by an absolute price tick and checks term
/// repos against the daily re-margin threshold principal * (1 + H/2).
std::vector<MarginCall> mark_treasuries(LedgerWorld& world, RepoBook& book, SecurityClass cls, Fraction tick);
std::vector<MarginCall> mark_treasuries(LedgerWorld& world, RepoBook& book, Fraction tick);
std::vector<MarginCall> check_margins(LedgerWorld& world, RepoBook& book);

/// Symbols of the backing-asset progression. T is Treasury face at a price;
/// repo principal earns r_T alongside it. Interest accrues into `income`.
struct PortfolioState {
  Amount t_face;
  Fraction t_price = Fraction::one();
  Amount d;
  Fraction r_t;
  Fraction r_d;
  std::vector<RepoPosition> repo;
  Amount income;
  /// Maturity ladder for liquidity metrics. When empty, T matures at t_maturity_day.
  std::vector<TreasuryBill> ladder;
  int t_maturity_day = 0;

  Amount treasuries() const { return apply(t_face, t_price); }
  Amount repo_principal() const;
  Amount total() const;
};

/// One period: interest on T (with repo) and D at start-of-period rates, a
/// capital gain from an absolute price change, and a deposit flow.
PortfolioState step_portfolio(const PortfolioState& p, Fraction price_change, Amount deposit_change);

}  // namespace parsim
