#include "parsim/ledger.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <sstream>
#include <tuple>

#include "json.hpp"

namespace parsim {

namespace {

constexpr std::array<std::string_view, 7> kKindNames = {"Fed",    "Bank",   "BrokerDealer", "Issuer",
                                                         "Intermediary", "Holder", "TreasuryBuyer"};

PositionKey reserves_key() { return {InstrumentKind::Reserves, SecurityClass::None, kFed}; }

}  // namespace

std::string_view to_string(AgentKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

std::string AgentId::to_string() const {
  return std::string{parsim::to_string(kind)} + "#" + std::to_string(index);
}

std::optional<AgentId> parse_agent_id(std::string_view s) {
  const auto hash = s.find('#');
  if (hash == std::string_view::npos) return std::nullopt;
  const auto kind_name = s.substr(0, hash);
  const auto it = std::find(kKindNames.begin(), kKindNames.end(), kind_name);
  if (it == kKindNames.end()) return std::nullopt;
  std::uint32_t idx = 0;
  const auto digits = s.substr(hash + 1);
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), idx);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
  return AgentId{static_cast<AgentKind>(it - kKindNames.begin()), idx};
}

std::string_view to_string(SecurityClass c) {
  switch (c) {
    case SecurityClass::None: return "None";
    case SecurityClass::Bill: return "Bill";
    case SecurityClass::Long: return "Long";
  }
  return "?";
}

std::string_view to_string(InstrumentKind k) {
  switch (k) {
    case InstrumentKind::Reserves: return "Reserves";
    case InstrumentKind::Deposit: return "Deposit";
    case InstrumentKind::Stablecoin: return "Stablecoin";
    case InstrumentKind::Repo: return "Repo";
    case InstrumentKind::SrfLoan: return "SrfLoan";
    case InstrumentKind::Treasury: return "Treasury";
    case InstrumentKind::PledgedCollateral: return "PledgedCollateral";
    case InstrumentKind::Loans: return "Loans";
    case InstrumentKind::OtherAssets: return "OtherAssets";
    case InstrumentKind::OtherLiabilities: return "OtherLiabilities";
  }
  return "?";
}

bool is_bilateral(InstrumentKind k) {
  switch (k) {
    case InstrumentKind::Reserves:
    case InstrumentKind::Deposit:
    case InstrumentKind::Stablecoin:
    case InstrumentKind::Repo:
    case InstrumentKind::SrfLoan:
      return true;
    default:
      return false;
  }
}

bool is_face_valued(InstrumentKind k) {
  return k == InstrumentKind::Treasury || k == InstrumentKind::PledgedCollateral;
}

std::string PositionKey::to_string() const {
  std::string out{parsim::to_string(kind)};
  if (cls != SecurityClass::None) out += ":" + std::string{parsim::to_string(cls)};
  if (counterparty) out += "@" + counterparty->to_string();
  return out;
}

Amount value_of(const PositionKey& key, Amount units, const PriceMarks& marks) {
  if (!is_face_valued(key.kind)) return units;
  return apply(units, marks.of(key.cls));
}

// ---------------------------------------------------------------------------
// BalanceSheet

Amount BalanceSheet::position(Side side, const PositionKey& key) const {
  const auto& book = side == Side::Asset ? assets_ : liabilities_;
  const auto it = book.find(key);
  return it == book.end() ? Amount::zero() : it->second;
}

Amount BalanceSheet::recompute_assets(const PriceMarks& marks) const {
  Amount total;
  for (const auto& [k, v] : assets_) total += value_of(k, v, marks);
  return total;
}

Amount BalanceSheet::recompute_liabilities(const PriceMarks& marks) const {
  Amount total;
  for (const auto& [k, v] : liabilities_) total += value_of(k, v, marks);
  return total;
}

Amount BalanceSheet::sum(Side side, InstrumentKind kind, std::optional<SecurityClass> cls) const {
  const auto& book = side == Side::Asset ? assets_ : liabilities_;
  Amount total;
  for (const auto& [k, v] : book) {
    if (k.kind == kind && (!cls || k.cls == *cls)) total += v;
  }
  return total;
}

Amount BalanceSheet::treasury_value(SecurityClass cls, const PriceMarks& marks) const {
  const PositionKey key{InstrumentKind::Treasury, cls, std::nullopt};
  return value_of(key, position(Side::Asset, key), marks);
}

// ---------------------------------------------------------------------------
// Events

const Event::Value* Event::find(std::string_view key) const {
  for (const auto& [k, v] : fields) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::string Event::to_json() const {
  nlohmann::ordered_json j;
  j["day"] = at.day;
  j["seq"] = at.seq;
  j["type"] = type;
  for (const auto& [k, v] : fields) {
    std::visit([&](const auto& x) { j[k] = x; }, v);
  }
  return j.dump();
}

std::size_t EventLog::count(std::string_view type) const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [&](const Event& e) { return e.type == type; }));
}

// ---------------------------------------------------------------------------
// LedgerWorld

LedgerWorld::LedgerWorld() { add_agent(AgentKind::Fed, "fed"); }

AgentId LedgerWorld::add_agent(AgentKind kind, std::string name) {
  const AgentId id{kind, next_index_[kind]++};
  BalanceSheet sheet{id, std::move(name)};
  sheet.reserve_account = kind == AgentKind::Bank || kind == AgentKind::BrokerDealer;
  agents_.emplace(id, std::move(sheet));
  return id;
}

void LedgerWorld::require(AgentId id) const {
  if (!has(id)) throw LedgerError(LedgerErrc::UnknownAgent, id, "unknown agent " + id.to_string());
}

const BalanceSheet& LedgerWorld::sheet(AgentId id) const {
  require(id);
  return agents_.at(id);
}

BalanceSheet& LedgerWorld::sheet_mut(AgentId id) {
  require(id);
  return agents_.at(id);
}

std::vector<AgentId> LedgerWorld::agents_of(AgentKind kind) const {
  std::vector<AgentId> out;
  for (const auto& [id, _] : agents_) {
    if (id.kind == kind) out.push_back(id);
  }
  return out;
}

std::optional<AgentId> LedgerWorld::find_by_name(std::string_view name) const {
  for (const auto& [id, s] : agents_) {
    if (s.name() == name) return id;
  }
  return std::nullopt;
}

Event& LedgerWorld::emit(std::string type) {
  Event e;
  e.at = tick();
  e.type = std::move(type);
  return events.push(std::move(e));
}

std::map<AgentId, Amount> LedgerWorld::set_mark(SecurityClass cls, Fraction price) {
  if (price.micros() <= 0) throw std::invalid_argument("price mark must be positive");
  PriceMarks next = marks_;
  (cls == SecurityClass::Long ? next.long_dated : next.bill) = price;
  std::map<AgentId, Amount> changes;
  for (auto& [id, s] : agents_) {
    Amount asset_delta;
    Amount liab_delta;
    for (const auto& [k, v] : s.assets_) {
      if (is_face_valued(k.kind) && k.cls == cls) asset_delta += value_of(k, v, next) - value_of(k, v, marks_);
    }
    for (const auto& [k, v] : s.liabilities_) {
      if (is_face_valued(k.kind) && k.cls == cls) liab_delta += value_of(k, v, next) - value_of(k, v, marks_);
    }
    s.asset_total_ += asset_delta;
    s.liability_total_ += liab_delta;
    if (!(asset_delta - liab_delta).is_zero()) changes[id] = asset_delta - liab_delta;
  }
  marks_ = next;
  return changes;
}

void LedgerWorld::apply(const PostingBatch& batch) {
  using Slot = std::tuple<AgentId, Side, PositionKey>;
  std::map<Slot, Amount> net;
  for (const auto& p : batch.postings) {
    require(p.agent);
    if (p.key.counterparty) require(*p.key.counterparty);
    if (is_bilateral(p.key.kind) && !p.key.counterparty) {
      throw LedgerError(LedgerErrc::InvalidPosting, p.agent, "bilateral position without counterparty");
    }
    auto& slot = net[Slot{p.agent, p.side, p.key}];
    slot += p.delta;
  }

  struct Change {
    BalanceSheet* sheet;
    Side side;
    const PositionKey* key;
    Amount next;
    Amount value_delta;
  };
  std::vector<Change> changes;
  changes.reserve(net.size());
  std::map<AgentId, std::pair<Amount, Amount>> total_delta;
  for (const auto& [slot, delta] : net) {
    const auto& [agent, side, key] = slot;
    if (delta.is_zero()) continue;
    BalanceSheet& s = agents_.at(agent);
    const Amount current = s.position(side, key);
    const Amount next = current + delta;
    if (next.is_negative()) {
      throw LedgerError(LedgerErrc::InsufficientPosition, agent,
                        agent.to_string() + " lacks " + key.to_string() + " for " + batch.label + " (has " +
                            current.to_string() + ", needs " + (-delta).to_string() + ")");
    }
    const Amount dv = value_of(key, next, marks_) - value_of(key, current, marks_);
    auto& td = total_delta[agent];
    (side == Side::Asset ? td.first : td.second) += dv;
    changes.push_back({&s, side, &key, next, dv});
  }
  // Totals are checked before any position is touched so a failure leaves the world unchanged.
  for (const auto& [agent, td] : total_delta) {
    const BalanceSheet& s = agents_.at(agent);
    (void)(s.asset_total_ + td.first);
    (void)(s.liability_total_ + td.second);
  }
  for (const auto& c : changes) {
    auto& book = c.side == Side::Asset ? c.sheet->assets_ : c.sheet->liabilities_;
    if (c.next.is_zero()) {
      book.erase(*c.key);
    } else {
      book[*c.key] = c.next;
    }
    (c.side == Side::Asset ? c.sheet->asset_total_ : c.sheet->liability_total_) += c.value_delta;
  }
}

void LedgerWorld::seed(AgentId agent, Side side, const PositionKey& key, Amount units) {
  PostingBatch b{"seed", {}};
  b.add({agent, side, key, units});
  apply(b);
}

PostingBatch LedgerWorld::payment_postings(AgentId from, AgentId to, Amount amount) const {
  PostingBatch b{"payment " + from.to_string() + "->" + to.to_string(), {}};
  if (amount.is_zero()) return b;
  if (amount.is_negative()) throw LedgerError(LedgerErrc::InvalidPosting, from, "negative payment");
  const BalanceSheet& payer = sheet(from);
  const BalanceSheet& payee = sheet(to);

  auto settlement_agent = [](const BalanceSheet& s) -> AgentId {
    if (s.reserve_account) return s.id();
    if (!s.home_bank) {
      throw LedgerError(LedgerErrc::NoSettlementAccount, s.id(), s.id().to_string() + " has no bank account");
    }
    return *s.home_bank;
  };
  const AgentId payer_settles = settlement_agent(payer);
  const AgentId payee_settles = settlement_agent(payee);

  if (!payer.reserve_account) {
    b.add({from, Side::Asset, {InstrumentKind::Deposit, SecurityClass::None, payer_settles}, -amount});
    b.add({payer_settles, Side::Liability, {InstrumentKind::Deposit, SecurityClass::None, from}, -amount});
  }
  if (!payee.reserve_account) {
    b.add({to, Side::Asset, {InstrumentKind::Deposit, SecurityClass::None, payee_settles}, amount});
    b.add({payee_settles, Side::Liability, {InstrumentKind::Deposit, SecurityClass::None, to}, amount});
  }
  if (payer_settles != payee_settles) {
    b.add({payer_settles, Side::Asset, reserves_key(), -amount});
    b.add({payee_settles, Side::Asset, reserves_key(), amount});
    b.add({kFed, Side::Liability, {InstrumentKind::Reserves, SecurityClass::None, payer_settles}, -amount});
    b.add({kFed, Side::Liability, {InstrumentKind::Reserves, SecurityClass::None, payee_settles}, amount});
  }
  return b;
}

PostingBatch LedgerWorld::transfer_postings(AgentId from, AgentId to, const Instrument& inst, Amount units) const {
  PostingBatch b{"transfer " + std::string{parsim::to_string(inst.kind)} + " " + from.to_string() + "->" +
                     to.to_string(),
                 {}};
  require(from);
  require(to);
  if (units.is_zero()) return b;
  if (units.is_negative()) throw LedgerError(LedgerErrc::InvalidPosting, from, "negative transfer");
  switch (inst.kind) {
    case InstrumentKind::Deposit:
      return payment_postings(from, to, units);
    case InstrumentKind::Reserves: {
      for (AgentId a : {from, to}) {
        if (!sheet(a).reserve_account) {
          throw LedgerError(LedgerErrc::NoSettlementAccount, a, a.to_string() + " has no reserve account");
        }
      }
      b.add({from, Side::Asset, reserves_key(), -units});
      b.add({to, Side::Asset, reserves_key(), units});
      b.add({kFed, Side::Liability, {InstrumentKind::Reserves, SecurityClass::None, from}, -units});
      b.add({kFed, Side::Liability, {InstrumentKind::Reserves, SecurityClass::None, to}, units});
      return b;
    }
    case InstrumentKind::Treasury: {
      const PositionKey key{InstrumentKind::Treasury, inst.cls, std::nullopt};
      b.add({from, Side::Asset, key, -units});
      b.add({to, Side::Asset, key, units});
      return b;
    }
    case InstrumentKind::Stablecoin: {
      if (!inst.issuer) throw LedgerError(LedgerErrc::InvalidPosting, from, "coin transfer without issuer");
      const AgentId issuer = *inst.issuer;
      b.add({from, Side::Asset, {InstrumentKind::Stablecoin, SecurityClass::None, issuer}, -units});
      b.add({to, Side::Asset, {InstrumentKind::Stablecoin, SecurityClass::None, issuer}, units});
      b.add({issuer, Side::Liability, {InstrumentKind::Stablecoin, SecurityClass::None, from}, -units});
      b.add({issuer, Side::Liability, {InstrumentKind::Stablecoin, SecurityClass::None, to}, units});
      return b;
    }
    default:
      throw LedgerError(LedgerErrc::InvalidPosting, from,
                        std::string{"instrument not transferable: "} + std::string{parsim::to_string(inst.kind)});
  }
}

PostingBatch LedgerWorld::claim_postings(AgentId creditor, AgentId debtor, InstrumentKind kind, Amount delta) const {
  if (!is_bilateral(kind)) throw LedgerError(LedgerErrc::InvalidPosting, creditor, "claim on non-bilateral instrument");
  PostingBatch b{"claim " + std::string{parsim::to_string(kind)} + " " + creditor.to_string() + "/" + debtor.to_string(),
                 {}};
  b.add({creditor, Side::Asset, {kind, SecurityClass::None, debtor}, delta});
  b.add({debtor, Side::Liability, {kind, SecurityClass::None, creditor}, delta});
  return b;
}

void LedgerWorld::post_transfer(AgentId from, AgentId to, const Instrument& inst, Amount units) {
  apply(transfer_postings(from, to, inst, units));
}

void LedgerWorld::pay(AgentId from, AgentId to, Amount amount) { apply(payment_postings(from, to, amount)); }

void LedgerWorld::create_claim(AgentId creditor, AgentId debtor, InstrumentKind kind, Amount amount) {
  apply(claim_postings(creditor, debtor, kind, amount));
}

void LedgerWorld::extinguish_claim(AgentId creditor, AgentId debtor, InstrumentKind kind, Amount amount) {
  apply(claim_postings(creditor, debtor, kind, -amount));
}

void LedgerWorld::schedule(int day, PostingBatch batch) { pending_.emplace(day, std::move(batch)); }

std::vector<PostingBatch> LedgerWorld::take_due(int day) {
  std::vector<PostingBatch> due;
  auto end = pending_.upper_bound(day);
  for (auto it = pending_.begin(); it != end; ++it) due.push_back(std::move(it->second));
  pending_.erase(pending_.begin(), end);
  return due;
}

std::size_t LedgerWorld::pending_count() const { return pending_.size(); }

Amount LedgerWorld::spendable(AgentId agent) const {
  const BalanceSheet& s = sheet(agent);
  if (s.reserve_account) return s.position(Side::Asset, reserves_key());
  if (!s.home_bank) return Amount::zero();
  return s.position(Side::Asset, {InstrumentKind::Deposit, SecurityClass::None, *s.home_bank});
}

// ---------------------------------------------------------------------------
// Audit

bool AuditReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const AuditCheck& c) { return c.passed; });
}

const AuditCheck* AuditReport::find(std::string_view name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::string AuditReport::to_string() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << c.name << ": " << (c.passed ? "pass" : "FAIL");
    if (c.first_violator) os << " at " << c.first_violator->to_string();
    if (!c.detail.empty()) os << " (" << c.detail << ")";
    os << "\n";
  }
  return os.str();
}

namespace {

AuditCheck named_check(std::string name) {
  AuditCheck c;
  c.name = std::move(name);
  return c;
}

void fail(AuditCheck& c, AgentId who, std::string detail) {
  if (!c.passed) return;
  c.passed = false;
  c.first_violator = who;
  c.detail = std::move(detail);
}

}  // namespace

AuditReport audit(const LedgerWorld& world) {
  AuditReport r;
  AuditCheck double_entry = named_check("DoubleEntry");
  AuditCheck non_negative = named_check("NonNegative");
  AuditCheck reserves = named_check("ReserveConservation");
  AuditCheck deposits = named_check("DepositMatching");
  AuditCheck claims = named_check("ClaimMatching");

  const auto& marks = world.marks();
  Amount reserve_assets;
  Amount fed_reserve_liabilities;

  for (const auto& [id, s] : world.agents()) {
    if (s.recompute_assets(marks) != s.total_assets() || s.recompute_liabilities(marks) != s.total_liabilities()) {
      fail(double_entry, id, "running totals diverge from positions");
    }
    for (const auto* book : {&s.assets(), &s.liabilities()}) {
      for (const auto& [k, v] : *book) {
        if (v.is_negative()) fail(non_negative, id, k.to_string() + " negative");
      }
    }
    for (const auto& [k, v] : s.assets()) {
      if (!is_bilateral(k.kind)) continue;
      const AgentId cp = *k.counterparty;
      Amount mirror;
      if (world.has(cp)) mirror = world.sheet(cp).position(Side::Liability, {k.kind, SecurityClass::None, id});
      const bool matched = world.has(cp) && mirror == v;
      switch (k.kind) {
        case InstrumentKind::Reserves:
          reserve_assets += v;
          if (!matched) fail(reserves, id, "reserve asset without matching Fed liability");
          break;
        case InstrumentKind::Deposit:
          if (!matched || cp.kind != AgentKind::Bank) fail(deposits, id, "deposit asset at " + cp.to_string() + " unmatched");
          break;
        default:
          if (!matched) fail(claims, id, k.to_string() + " unmatched");
      }
    }
    for (const auto& [k, v] : s.liabilities()) {
      if (!is_bilateral(k.kind)) continue;
      const AgentId cp = *k.counterparty;
      Amount mirror;
      if (world.has(cp)) mirror = world.sheet(cp).position(Side::Asset, {k.kind, SecurityClass::None, id});
      const bool matched = world.has(cp) && mirror == v;
      switch (k.kind) {
        case InstrumentKind::Reserves:
          fed_reserve_liabilities += v;
          if (!matched) fail(reserves, cp, "Fed reserve liability without matching asset");
          break;
        case InstrumentKind::Deposit:
          if (!matched) fail(deposits, cp, "bank deposit liability without matching asset");
          break;
        default:
          if (!matched) fail(claims, cp, k.to_string() + " liability unmatched");
      }
    }
  }
  if (reserve_assets != fed_reserve_liabilities) {
    fail(reserves, kFed, "sum of reserve assets " + reserve_assets.to_string() + " != Fed liabilities " +
                             fed_reserve_liabilities.to_string());
  }
  r.checks = {double_entry, non_negative, reserves, deposits, claims};
  return r;
}

Amount total_bank_deposits(const LedgerWorld& world) {
  Amount total;
  for (const auto& [id, s] : world.agents()) {
    if (id.kind == AgentKind::Bank) total += s.sum(Side::Liability, InstrumentKind::Deposit);
  }
  return total;
}

Amount total_reserve_assets(const LedgerWorld& world) {
  Amount total;
  for (const auto& [id, s] : world.agents()) total += s.sum(Side::Asset, InstrumentKind::Reserves);
  return total;
}

// ---------------------------------------------------------------------------
// Snapshot

WorldSnapshot snapshot(const LedgerWorld& world) {
  std::vector<AgentSnapshot> agents;
  agents.reserve(world.agents().size());
  const auto& marks = world.marks();
  for (const auto& [id, s] : world.agents()) {
    AgentSnapshot a{id, s.name(), {}, {}, s.total_assets(), s.total_liabilities(), s.equity()};
    for (const auto& [k, v] : s.assets()) a.assets.push_back({k, v, value_of(k, v, marks)});
    for (const auto& [k, v] : s.liabilities()) a.liabilities.push_back({k, v, value_of(k, v, marks)});
    agents.push_back(std::move(a));
  }
  return WorldSnapshot{world.clock(), marks, std::move(agents)};
}

const AgentSnapshot* WorldSnapshot::find(AgentId id) const {
  const auto it = std::lower_bound(agents_.begin(), agents_.end(), id,
                                   [](const AgentSnapshot& a, AgentId x) { return a.id < x; });
  return it != agents_.end() && it->id == id ? &*it : nullptr;
}

std::string WorldSnapshot::to_json() const {
  auto positions = [](const std::vector<PositionSnapshot>& ps) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& p : ps) {
      nlohmann::ordered_json j;
      j["instrument"] = std::string{to_string(p.key.kind)};
      j["class"] = std::string{to_string(p.key.cls)};
      j["counterparty"] = p.key.counterparty ? p.key.counterparty->to_string() : std::string{};
      j["units"] = p.units.cents();
      j["value"] = p.value.cents();
      arr.push_back(std::move(j));
    }
    return arr;
  };
  nlohmann::ordered_json root;
  root["day"] = clock_.day;
  root["seq"] = clock_.seq;
  root["marks"] = {{"bill", marks_.bill.micros()}, {"long", marks_.long_dated.micros()}};
  root["agents"] = nlohmann::ordered_json::array();
  for (const auto& a : agents_) {
    nlohmann::ordered_json j;
    j["id"] = a.id.to_string();
    j["name"] = a.name;
    j["assets"] = positions(a.assets);
    j["liabilities"] = positions(a.liabilities);
    j["total_assets"] = a.total_assets.cents();
    j["total_liabilities"] = a.total_liabilities.cents();
    j["equity"] = a.equity.cents();
    root["agents"].push_back(std::move(j));
  }
  return root.dump();
}

}  // namespace parsim
