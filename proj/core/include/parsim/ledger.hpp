#pragma once

// Double-entry balance-sheet substrate shared by every other module.
//
// Each agent owns a BalanceSheet of positions keyed by (instrument, security
// class, counterparty). Bilateral instruments (reserves, deposits, coins,
// repo claims, SRF loans) appear twice: as an asset at the creditor keyed by
// the debtor and as a liability at the debtor keyed by the creditor.
// Treasury positions are held as face and valued at the world's price marks.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "parsim/money.hpp"

namespace parsim {

enum class AgentKind : std::uint8_t { Fed, Bank, BrokerDealer, Issuer, Intermediary, Holder, TreasuryBuyer };

std::string_view to_string(AgentKind k);

struct AgentId {
  AgentKind kind = AgentKind::Fed;
  std::uint32_t index = 0;

  constexpr auto operator<=>(const AgentId&) const = default;
  std::string to_string() const;
};

inline constexpr AgentId kFed{AgentKind::Fed, 0};

enum class SecurityClass : std::uint8_t { None, Bill, Long };

std::string_view to_string(SecurityClass c);

enum class InstrumentKind : std::uint8_t {
  Reserves,          // bilateral: reserve account holder / Fed
  Deposit,           // bilateral: depositor / bank
  Stablecoin,        // bilateral: coin holder / issuer
  Repo,              // bilateral: cash lender / collateral provider
  SrfLoan,           // bilateral: Fed / borrowing dealer
  Treasury,          // face, valued at the class mark
  PledgedCollateral, // face pledged to the counterparty, still owned by the pledgor
  Loans,             // bank loan book, cash valued
  OtherAssets,       // cash valued
  OtherLiabilities,  // cash valued
};

std::string_view to_string(InstrumentKind k);
bool is_bilateral(InstrumentKind k);
bool is_face_valued(InstrumentKind k);

enum class Side : std::uint8_t { Asset, Liability };

struct PositionKey {
  InstrumentKind kind = InstrumentKind::OtherAssets;
  SecurityClass cls = SecurityClass::None;
  std::optional<AgentId> counterparty;

  auto operator<=>(const PositionKey&) const = default;
  std::string to_string() const;
};

/// What moves in a transfer. `issuer` names the stablecoin for Stablecoin transfers.
struct Instrument {
  InstrumentKind kind = InstrumentKind::Deposit;
  SecurityClass cls = SecurityClass::None;
  std::optional<AgentId> issuer;

  static Instrument deposits() { return {InstrumentKind::Deposit, SecurityClass::None, std::nullopt}; }
  static Instrument reserves() { return {InstrumentKind::Reserves, SecurityClass::None, std::nullopt}; }
  static Instrument treasury(SecurityClass c) { return {InstrumentKind::Treasury, c, std::nullopt}; }
  static Instrument coin(AgentId issuer) { return {InstrumentKind::Stablecoin, SecurityClass::None, issuer}; }
};

/// Market prices for Treasury face, as a fraction of face.
struct PriceMarks {
  Fraction bill = Fraction::one();
  Fraction long_dated = Fraction::one();

  Fraction of(SecurityClass c) const { return c == SecurityClass::Long ? long_dated : bill; }
  auto operator<=>(const PriceMarks&) const = default;
};

/// Value of a position: face-valued instruments at the mark, everything else at par.
Amount value_of(const PositionKey& key, Amount units, const PriceMarks& marks);

enum class LedgerErrc : std::uint8_t { InsufficientPosition, UnknownAgent, InvalidPosting, NoSettlementAccount };

class LedgerError : public std::runtime_error {
 public:
  LedgerError(LedgerErrc code, std::optional<AgentId> agent, const std::string& what)
      : std::runtime_error(what), code_(code), agent_(agent) {}
  LedgerErrc code() const { return code_; }
  std::optional<AgentId> agent() const { return agent_; }

 private:
  LedgerErrc code_;
  std::optional<AgentId> agent_;
};

struct Posting {
  AgentId agent;
  Side side = Side::Asset;
  PositionKey key;
  Amount delta;  // face units for face-valued instruments, cents otherwise
};

struct PostingBatch {
  std::string label;
  std::vector<Posting> postings;

  void add(const Posting& p) { postings.push_back(p); }
  void append(const PostingBatch& other) {
    postings.insert(postings.end(), other.postings.begin(), other.postings.end());
  }
};

class BalanceSheet {
 public:
  BalanceSheet() = default;
  BalanceSheet(AgentId id, std::string name) : id_(id), name_(std::move(name)) {}

  AgentId id() const { return id_; }
  const std::string& name() const { return name_; }

  /// Bank holding this agent's deposit account; empty for reserve-account holders.
  std::optional<AgentId> home_bank;
  /// Settles payments in central bank reserves rather than bank deposits.
  bool reserve_account = false;

  Amount position(Side side, const PositionKey& key) const;
  const std::map<PositionKey, Amount>& assets() const { return assets_; }
  const std::map<PositionKey, Amount>& liabilities() const { return liabilities_; }

  /// Running totals maintained by the ledger on every commit and re-mark.
  Amount total_assets() const { return asset_total_; }
  Amount total_liabilities() const { return liability_total_; }
  Amount equity() const { return asset_total_ - liability_total_; }

  /// Totals recomputed from positions; audit compares them with the running totals.
  Amount recompute_assets(const PriceMarks& marks) const;
  Amount recompute_liabilities(const PriceMarks& marks) const;

  /// Sum over every key of a kind (and class, when given).
  Amount sum(Side side, InstrumentKind kind, std::optional<SecurityClass> cls = std::nullopt) const;
  /// Value of every Treasury face position of a class, at marks.
  Amount treasury_value(SecurityClass cls, const PriceMarks& marks) const;

 private:
  friend class LedgerWorld;
  AgentId id_;
  std::string name_;
  std::map<PositionKey, Amount> assets_;
  std::map<PositionKey, Amount> liabilities_;
  Amount asset_total_;
  Amount liability_total_;
};

struct Clock {
  int day = 0;
  std::uint64_t seq = 0;
  auto operator<=>(const Clock&) const = default;
};

/// One timestamped entry in the JSON-lines event log. Amount fields are cents.
struct Event {
  using Value = std::variant<std::int64_t, std::string, bool>;
  Clock at;
  std::string type;
  std::vector<std::pair<std::string, Value>> fields;

  Event& with(std::string key, Value v) {
    fields.emplace_back(std::move(key), std::move(v));
    return *this;
  }
  Event& with(std::string key, Amount a) { return with(std::move(key), Value{a.cents()}); }
  Event& with(std::string key, AgentId a) { return with(std::move(key), Value{a.to_string()}); }
  Event& with(std::string key, const char* s) { return with(std::move(key), Value{std::string{s}}); }

  const Value* find(std::string_view key) const;
  std::string to_json() const;
};

class EventLog {
 public:
  const std::vector<Event>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t count(std::string_view type) const;
  Event& push(Event e) {
    entries_.push_back(std::move(e));
    return entries_.back();
  }
  void clear() { entries_.clear(); }

 private:
  std::vector<Event> entries_;
};

struct AuditCheck {
  std::string name;
  bool passed = true;
  std::optional<AgentId> first_violator;
  std::string detail;
};

struct AuditReport {
  std::vector<AuditCheck> checks;

  bool ok() const;
  const AuditCheck* find(std::string_view name) const;
  std::string to_string() const;
};

struct PositionSnapshot {
  PositionKey key;
  Amount units;
  Amount value;
};

struct AgentSnapshot {
  AgentId id;
  std::string name;
  std::vector<PositionSnapshot> assets;
  std::vector<PositionSnapshot> liabilities;
  Amount total_assets;
  Amount total_liabilities;
  Amount equity;
};

/// Immutable copy of the world; safe to hand to other threads.
class WorldSnapshot {
 public:
  WorldSnapshot(Clock clock, PriceMarks marks, std::vector<AgentSnapshot> agents)
      : clock_(clock), marks_(marks), agents_(std::move(agents)) {}

  const Clock& clock() const { return clock_; }
  const PriceMarks& marks() const { return marks_; }
  const std::vector<AgentSnapshot>& agents() const { return agents_; }
  const AgentSnapshot* find(AgentId id) const;

  /// Stable JSON: agents in id order, positions in key order.
  std::string to_json() const;

 private:
  Clock clock_;
  PriceMarks marks_;
  std::vector<AgentSnapshot> agents_;
};

class LedgerWorld {
 public:
  LedgerWorld();

  AgentId add_agent(AgentKind kind, std::string name);
  bool has(AgentId id) const { return agents_.contains(id); }
  const BalanceSheet& sheet(AgentId id) const;
  BalanceSheet& sheet_mut(AgentId id);
  const std::map<AgentId, BalanceSheet>& agents() const { return agents_; }
  std::vector<AgentId> agents_of(AgentKind kind) const;
  std::optional<AgentId> find_by_name(std::string_view name) const;

  const Clock& clock() const { return clock_; }
  void set_day(int day) { clock_.day = day; }
  Clock tick() { ++clock_.seq; return clock_; }

  const PriceMarks& marks() const { return marks_; }
  /// Re-mark one security class; returns each agent's valuation change.
  std::map<AgentId, Amount> set_mark(SecurityClass cls, Fraction price);

  /// Applies every posting or none. Throws LedgerError on any violation.
  void apply(const PostingBatch& batch);
  /// Genesis postings for initial endowments; may create equity.
  void seed(AgentId agent, Side side, const PositionKey& key, Amount units);

  // Posting builders. They validate nothing; apply() does.
  PostingBatch transfer_postings(AgentId from, AgentId to, const Instrument& inst, Amount units) const;
  PostingBatch payment_postings(AgentId from, AgentId to, Amount amount) const;
  PostingBatch claim_postings(AgentId creditor, AgentId debtor, InstrumentKind kind, Amount delta) const;

  /// Atomic double-entry move of `units` of an instrument between two agents.
  void post_transfer(AgentId from, AgentId to, const Instrument& inst, Amount units);
  /// Money payment over the deposit/reserve rails of both parties.
  void pay(AgentId from, AgentId to, Amount amount);
  void create_claim(AgentId creditor, AgentId debtor, InstrumentKind kind, Amount amount);
  void extinguish_claim(AgentId creditor, AgentId debtor, InstrumentKind kind, Amount amount);

  /// Settlement queue for legs that settle on a later day (T+1 trades).
  void schedule(int day, PostingBatch batch);
  std::vector<PostingBatch> take_due(int day);
  std::size_t pending_count() const;

  /// Money an agent can pay out today over its rail.
  Amount spendable(AgentId agent) const;

  EventLog events;
  Event& emit(std::string type);

 private:
  void require(AgentId id) const;

  Clock clock_;
  PriceMarks marks_;
  std::map<AgentId, BalanceSheet> agents_;
  std::map<AgentKind, std::uint32_t> next_index_;
  std::multimap<int, PostingBatch> pending_;
};

/// Invariant checks over the whole world; never mutates.
AuditReport audit(const LedgerWorld& world);
WorldSnapshot snapshot(const LedgerWorld& world);

/// Σ of every bank deposit liability in the world.
Amount total_bank_deposits(const LedgerWorld& world);
/// Σ of every reserve asset held by a reserve account.
Amount total_reserve_assets(const LedgerWorld& world);

/// Parses "Bank#0" style ids produced by AgentId::to_string.
std::optional<AgentId> parse_agent_id(std::string_view s);

}  // namespace parsim
