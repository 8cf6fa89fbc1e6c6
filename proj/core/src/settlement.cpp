#include "parsim/settlement.hpp"

#include <algorithm>
#include <array>
#include <tuple>

namespace parsim {

namespace {

constexpr std::array<SecurityClass, 2> kClasses = {SecurityClass::Bill, SecurityClass::Long};

PositionKey treasury_key(SecurityClass cls) { return {InstrumentKind::Treasury, cls, std::nullopt}; }
PositionKey coin_key(AgentId issuer) { return {InstrumentKind::Stablecoin, SecurityClass::None, issuer}; }

PostingBatch redemption_batch(const LedgerWorld& world, AgentId issuer, AgentId holder, Amount amount) {
  PostingBatch b = world.payment_postings(issuer, holder, amount);
  b.label = "redemption";
  b.append(world.claim_postings(holder, issuer, InstrumentKind::Stablecoin, -amount));
  return b;
}

Amount recalled_total(const IssuerDesk& desk) {
  Amount total;
  for (const auto& [id, amt] : desk.recalled) total += amt;
  return total;
}

Amount incoming(const IssuerDesk& desk, const LedgerWorld& world, const Market& market) {
  return market.pending_proceeds(world, desk.issuer) + recalled_total(desk);
}

// Fills `leg` with sales and recalls worth `need`. Bills go first, then
// long-dated securities, then repo the issuer declines to roll.
Funding raise(const IssuerDesk& desk, const LedgerWorld& world, const Market& market, const RepoBook& book,
              Amount need, PlanLeg& leg, int& horizon) {
  const auto& s = world.sheet(desk.issuer);
  const PriceMarks& marks = world.marks();
  std::map<SecurityClass, Amount> free;
  Amount avail;
  for (SecurityClass cls : kClasses) {
    free[cls] = max(Amount::zero(), s.position(Side::Asset, treasury_key(cls)) - market.pending_face(desk.issuer, cls));
    avail += apply(free[cls], marks.of(cls));
  }
  std::vector<const RepoPosition*> repos = book.lent_by(desk.issuer);
  std::sort(repos.begin(), repos.end(), [](const RepoPosition* a, const RepoPosition* b) {
    return std::tie(a->second_leg_day, a->id) < std::tie(b->second_leg_day, b->id);
  });
  Amount recallable;
  for (const auto* p : repos) {
    const auto it = desk.recalled.find(p->id);
    recallable += p->principal - (it == desk.recalled.end() ? Amount::zero() : it->second);
  }

  Funding route = Funding::SellTreasuries;
  Amount rem = need;
  const bool sell = avail >= need || recallable < need;
  if (sell) {
    for (SecurityClass cls : kClasses) {
      if (!rem.is_positive()) break;
      const Amount face = min(free[cls], divide_ceil(rem, marks.of(cls)));
      if (!face.is_positive()) continue;
      leg.sales.push_back({cls, face});
      rem -= apply(face, marks.of(cls));
    }
  } else {
    route = Funding::RepoNonRollover;
  }
  if (rem.is_positive()) {
    for (const auto* p : repos) {
      if (!rem.is_positive()) break;
      const auto it = desk.recalled.find(p->id);
      const Amount open = p->principal - (it == desk.recalled.end() ? Amount::zero() : it->second);
      const Amount take = min(open, rem);
      if (!take.is_positive()) continue;
      leg.recalls.push_back({p->id, take});
      rem -= take;
      horizon = std::max(horizon, std::max(1, p->second_leg_day - world.clock().day));
    }
  }
  if (leg.sales.empty() && leg.recalls.empty() && sell && recallable.is_zero()) route = Funding::SellTreasuries;
  if (!leg.sales.empty()) horizon = std::max(horizon, 1);
  return route;
}

void start_leg(IssuerDesk& desk, const PlanLeg& leg, LedgerWorld& world, Market& market, RepoBook& book) {
  for (const auto& sale : leg.sales) market.submit(world, desk.issuer, sale.cls, sale.face);
  for (const auto& r : leg.recalls) {
    const RepoPosition* pos = book.find(r.repo_id);
    if (pos == nullptr) continue;
    desk.recalled[r.repo_id] += r.amount;
    market.funding_gap_liquidation(world, decline_roll(world, *pos, r.amount));
  }
}

LegFailure classify_failure(const IssuerDesk& desk, const LedgerWorld& world, const Market& market) {
  for (const auto& o : market.orders()) {
    if (o.seller == desk.issuer && o.open_face().is_positive()) return LegFailure::DealerCapacity;
  }
  for (const auto& [id, amt] : desk.recalled) {
    if (amt.is_positive() && market.has_gap(id)) return LegFailure::DealerCapacity;
  }
  if (incoming(desk, world, market).is_positive()) return LegFailure::AwaitingFunds;
  return LegFailure::Insolvent;
}

}  // namespace

std::string_view to_string(AccessMode m) { return m == AccessMode::Direct ? "direct" : "intermediated"; }

std::string_view to_string(Funding f) {
  switch (f) {
    case Funding::FromDeposits: return "FromDeposits";
    case Funding::SellTreasuries: return "SellTreasuries";
    case Funding::RepoNonRollover: return "RepoNonRollover";
  }
  return "?";
}

std::string_view to_string(ParMode m) {
  switch (m) {
    case ParMode::RigorousFixed: return "rigorous_fixed";
    case ParMode::Corridor: return "corridor";
    case ParMode::BestEffort: return "best_effort";
  }
  return "?";
}

std::string_view to_string(LegFailure f) {
  switch (f) {
    case LegFailure::None: return "None";
    case LegFailure::DealerCapacity: return "DealerCapacity";
    case LegFailure::AwaitingFunds: return "AwaitingFunds";
    case LegFailure::Liveness: return "Liveness";
    case LegFailure::Insolvent: return "Insolvent";
  }
  return "?";
}

Amount coins_outstanding(const LedgerWorld& world, AgentId issuer) {
  return world.sheet(issuer).sum(Side::Liability, InstrumentKind::Stablecoin);
}

Amount coins_held(const LedgerWorld& world, AgentId holder, AgentId issuer) {
  return world.sheet(holder).position(Side::Asset, coin_key(issuer));
}

Amount IssuerDesk::committed() const {
  Amount total;
  for (const auto& q : queue) total += q.request.amount;
  return total;
}

Amount IssuerDesk::pending_for(AgentId holder) const {
  Amount total;
  for (const auto& q : queue) {
    if (q.request.holder == holder) total += q.request.amount;
  }
  return total;
}

Amount IssuerDesk::delayed_amount() const {
  Amount total;
  for (const auto& q : queue) {
    if (q.delayed) total += q.request.amount;
  }
  return total;
}

int IssuerDesk::max_delay_age(int today) const {
  int age = 0;
  for (const auto& q : queue) age = std::max(age, q.age(today));
  return age;
}

bool IssuerDesk::may_redeem_directly(AgentId holder) const {
  if (access == AccessMode::Direct) return true;
  return holder.kind == AgentKind::Intermediary || eligible.contains(holder);
}

RedemptionRequest make_request(IssuerDesk& desk, const LedgerWorld& world, AgentId holder, Amount amount,
                               RedemptionRoute route) {
  RedemptionRequest r;
  r.id = desk.next_request++;
  r.holder = holder;
  r.issuer = desk.issuer;
  r.amount = amount;
  r.submitted = world.clock();
  r.route = route;
  return r;
}

SettlementPlan plan_redemption(const IssuerDesk& desk, const RedemptionRequest& req, const LedgerWorld& world,
                               const Market& market, const RepoBook& book) {
  if (!req.amount.is_positive()) throw SettlementError(SettlementErrc::InvalidRequest, "redemption amount must be positive");
  if (req.issuer != desk.issuer) throw SettlementError(SettlementErrc::InvalidRequest, "request for another issuer");
  if (req.route == RedemptionRoute::Direct && !desk.may_redeem_directly(req.holder)) {
    throw SettlementError(SettlementErrc::IneligibleRedeemer,
                          world.sheet(req.holder).name() + " may not redeem directly");
  }
  if (coins_held(world, req.holder, desk.issuer) - desk.pending_for(req.holder) < req.amount) {
    throw SettlementError(SettlementErrc::InvalidRequest, "holder lacks the coins to redeem");
  }

  SettlementPlan plan;
  PlanLeg pay;
  pay.label = "pay holder";
  pay.postings = redemption_batch(world, desk.issuer, req.holder, req.amount);

  const Amount cash = world.spendable(desk.issuer);
  const Amount committed = desk.committed();
  if (cash - committed >= req.amount) {
    plan.funding = Funding::FromDeposits;
    plan.legs.push_back(std::move(pay));
    return plan;
  }

  const Amount in = incoming(desk, world, market);
  Amount uncovered = committed + req.amount - cash - in;
  uncovered = std::clamp(uncovered, Amount::zero(), req.amount);
  plan.to_raise = uncovered;
  int horizon = 1;
  PlanLeg raise_leg;
  raise_leg.label = "raise cash";
  if (uncovered.is_positive()) {
    plan.funding = raise(desk, world, market, book, uncovered, raise_leg, horizon);
  } else {
    plan.funding = market.pending_proceeds(world, desk.issuer).is_positive() ? Funding::SellTreasuries
                                                                              : Funding::RepoNonRollover;
  }
  plan.legs.push_back(std::move(raise_leg));
  pay.day_offset = horizon;
  plan.legs.push_back(std::move(pay));
  return plan;
}

QueueStep execute_plan(IssuerDesk& desk, const RedemptionRequest& req, SettlementPlan plan, LedgerWorld& world,
                       Market& market, RepoBook& book) {
  for (const auto& leg : plan.legs) {
    if (leg.day_offset == 0) start_leg(desk, leg, world, market, book);
  }
  QueuedRedemption q;
  q.request = req;
  q.due_day = world.clock().day + plan.horizon();
  world.emit("RedemptionPlanned")
      .with("issuer", desk.issuer)
      .with("request", static_cast<std::int64_t>(req.id))
      .with("holder", req.holder)
      .with("amount", req.amount)
      .with("funding", std::string{to_string(plan.funding)})
      .with("horizon", static_cast<std::int64_t>(plan.horizon()));
  q.plan = std::move(plan);
  desk.queue.push_back(std::move(q));
  return process_queue(desk, world, market, world.clock().day);
}

QueueStep process_queue(IssuerDesk& desk, LedgerWorld& world, const Market& market, int today) {
  QueueStep step;
  for (auto it = desk.queue.begin(); it != desk.queue.end();) {
    if (it->due_day > today) {
      ++it;
      continue;
    }
    LegFailure cause = LegFailure::None;
    if (desk.liveness_blocked) {
      cause = LegFailure::Liveness;
    } else if (world.spendable(desk.issuer) < it->request.amount) {
      cause = classify_failure(desk, world, market);
    }
    if (cause != LegFailure::None) {
      step.blocked_by = cause;
      // Everything due behind a failed head waits with it.
      for (; it != desk.queue.end(); ++it) {
        if (it->due_day > today) continue;
        it->last_failure = cause;
        if (it->delayed) continue;
        it->delayed = true;
        step.newly_delayed.push_back(it->request.id);
        step.newly_delayed_amount += it->request.amount;
        world.emit("RedemptionDelayed")
            .with("issuer", desk.issuer)
            .with("request", static_cast<std::int64_t>(it->request.id))
            .with("amount", it->request.amount)
            .with("cause", std::string{to_string(cause)});
      }
      break;
    }
    world.apply(redemption_batch(world, desk.issuer, it->request.holder, it->request.amount));
    const int delay = std::max(0, today - it->due_day);
    world.emit("RedemptionPaid")
        .with("issuer", desk.issuer)
        .with("request", static_cast<std::int64_t>(it->request.id))
        .with("holder", it->request.holder)
        .with("amount", it->request.amount)
        .with("delay_days", static_cast<std::int64_t>(delay));
    step.completed.push_back({it->request, today, delay});
    it = desk.queue.erase(it);
  }
  return step;
}

void top_up_funding(IssuerDesk& desk, LedgerWorld& world, Market& market, RepoBook& book) {
  const Amount uncovered = desk.committed() - world.spendable(desk.issuer) - incoming(desk, world, market);
  if (!uncovered.is_positive()) return;
  PlanLeg leg;
  int horizon = 1;
  raise(desk, world, market, book, uncovered, leg, horizon);
  if (leg.sales.empty() && leg.recalls.empty()) return;
  start_leg(desk, leg, world, market, book);
  world.emit("FundingTopUp").with("issuer", desk.issuer).with("amount", uncovered);
}

SettlementPlan plan_mint(const IssuerDesk& desk, AgentId buyer, Amount amount, const LedgerWorld& world,
                         Fraction secondary_price, std::optional<AgentId> bill_seller) {
  if (desk.liveness_blocked) throw SettlementError(SettlementErrc::MintDeclined, "mint declined: chain halted");
  if (desk.policy.mode == ParMode::BestEffort && secondary_price < Fraction::one()) {
    throw SettlementError(SettlementErrc::MintDeclined, "mint declined: coin trades below par");
  }
  if (desk.decline_negative_carry && desk.treasury_yield <= Fraction::zero()) {
    throw SettlementError(SettlementErrc::MintDeclined, "mint declined: non-positive Treasury yield");
  }
  if (!amount.is_positive()) throw SettlementError(SettlementErrc::InvalidRequest, "mint amount must be positive");
  if (world.spendable(buyer) < amount) throw SettlementError(SettlementErrc::InvalidRequest, "buyer lacks deposits");

  SettlementPlan plan;
  PlanLeg mint;
  mint.label = "mint";
  mint.postings = world.payment_postings(buyer, desk.issuer, amount);
  mint.postings.label = "mint";
  mint.postings.append(world.claim_postings(buyer, desk.issuer, InstrumentKind::Stablecoin, amount));
  plan.legs.push_back(std::move(mint));

  if (bill_seller && desk.mint_bill_share.micros() > 0) {
    const int today = world.clock().day;
    const Fraction mb = world.marks().bill;
    const Amount avail = world.sheet(*bill_seller).position(Side::Asset, treasury_key(SecurityClass::Bill));
    const Amount face = min(avail, divide_floor(apply(amount, desk.mint_bill_share), mb));
    if (face.is_positive()) {
      check_bill({face, today + desk.mint_bill_maturity_days, mb, true}, today, desk.genius_compliant);
      PlanLeg buy;
      buy.label = "invest in bills";
      buy.postings = world.transfer_postings(*bill_seller, desk.issuer, Instrument::treasury(SecurityClass::Bill), face);
      buy.postings.append(world.payment_postings(desk.issuer, *bill_seller, apply(face, mb)));
      plan.legs.push_back(std::move(buy));
    }
  }
  return plan;
}

void execute_mint(const SettlementPlan& plan, LedgerWorld& world) {
  PostingBatch all;
  all.label = "mint";
  for (const auto& leg : plan.legs) all.append(leg.postings);
  world.apply(all);
}

std::vector<IssuerAction> intervene(const ParPolicy& policy, Fraction price, Amount coins) {
  const Fraction par = Fraction::one();
  Fraction lower = par;
  Fraction upper = par;
  switch (policy.mode) {
    case ParMode::BestEffort: return {};
    case ParMode::Corridor:
      lower = par - Fraction::bp(policy.corridor_bp);
      upper = par + Fraction::bp(policy.corridor_bp);
      break;
    case ParMode::RigorousFixed: break;
  }
  std::vector<IssuerAction> out;
  if (price < lower) {
    out.push_back({ActionKind::Buy, apply(apply(coins, lower - price), policy.supply_response), lower});
  } else if (price > upper) {
    out.push_back({ActionKind::Mint, apply(apply(coins, price - upper), policy.supply_response), upper});
  }
  if (!out.empty() && !out.front().coins.is_positive()) out.clear();
  return out;
}

Amount execute_intervention(IssuerDesk& desk, const IssuerAction& action, LedgerWorld& world,
                            const std::vector<std::pair<AgentId, Amount>>& counterparties) {
  if (desk.liveness_blocked || !action.coins.is_positive() || !action.target.micros()) return Amount::zero();
  Amount remaining = action.coins;
  Amount traded;
  if (action.kind == ActionKind::Buy) {
    Amount budget = world.spendable(desk.issuer) - desk.committed();
    for (const auto& [cp, limit] : counterparties) {
      if (!remaining.is_positive() || !budget.is_positive()) break;
      Amount take = min(min(remaining, limit), coins_held(world, cp, desk.issuer) - desk.pending_for(cp));
      take = min(take, divide_floor(budget, action.target));
      if (!take.is_positive()) continue;
      const Amount value = apply(take, action.target);
      PostingBatch b = world.payment_postings(desk.issuer, cp, value);
      b.label = "par defense buy";
      b.append(world.claim_postings(cp, desk.issuer, InstrumentKind::Stablecoin, -take));
      world.apply(b);
      budget -= value;
      remaining -= take;
      traded += take;
    }
  } else {
    for (const auto& [cp, limit] : counterparties) {
      if (!remaining.is_positive()) break;
      const Amount take = min(min(remaining, limit), divide_floor(world.spendable(cp), action.target));
      if (!take.is_positive()) continue;
      PostingBatch b = world.payment_postings(cp, desk.issuer, apply(take, action.target));
      b.label = "par defense mint";
      b.append(world.claim_postings(cp, desk.issuer, InstrumentKind::Stablecoin, take));
      world.apply(b);
      remaining -= take;
      traded += take;
    }
  }
  if (traded.is_positive()) {
    world.emit("Intervention")
        .with("issuer", desk.issuer)
        .with("kind", action.kind == ActionKind::Buy ? "buy" : "mint")
        .with("coins", traded)
        .with("target_micros", action.target.micros());
  }
  return traded;
}

void srf_leg(LedgerWorld& world, const DealerProfile& dealer, Amount amount, bool enabled, const SlrParams& slr) {
  if (!enabled) throw SrfError(SrfErrc::Disabled, "standing repo facility disabled");
  if (!amount.is_positive()) return;
  const Amount headroom = dealer_headroom(world, dealer, slr);
  if (headroom < amount) {
    throw SrfError(SrfErrc::SlrBound, "SRF draw " + amount.to_string() + " exceeds SLR headroom " + headroom.to_string());
  }
  const auto& s = world.sheet(dealer.id);
  std::map<SecurityClass, Amount> avail;
  for (SecurityClass cls : kClasses) avail[cls] = s.position(Side::Asset, treasury_key(cls));
  std::map<SecurityClass, Amount> faces;
  try {
    faces = select_collateral(avail, world.marks(), amount, RepoTerms{}.long_share);
  } catch (const InstrumentError& e) {
    throw SrfError(SrfErrc::InsufficientCollateral, e.what());
  }
  PostingBatch b;
  b.label = "srf draw";
  for (const auto& [cls, face] : faces) {
    b.add({dealer.id, Side::Asset, treasury_key(cls), -face});
    b.add({dealer.id, Side::Asset, {InstrumentKind::PledgedCollateral, cls, kFed}, face});
  }
  b.append(world.claim_postings(dealer.id, kFed, InstrumentKind::Reserves, amount));
  b.append(world.claim_postings(kFed, dealer.id, InstrumentKind::SrfLoan, amount));
  world.apply(b);
  world.emit("SrfDraw").with("dealer", dealer.id).with("amount", amount);
}

}  // namespace parsim
