#include "parsim/market.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <tuple>
#include <utility>

#include "parsim/srf.hpp"

namespace parsim {

namespace {

PositionKey treasury_key(SecurityClass cls) { return {InstrumentKind::Treasury, cls, std::nullopt}; }

constexpr std::array<SecurityClass, 2> kClasses = {SecurityClass::Bill, SecurityClass::Long};

Amount free_treasury_value(const LedgerWorld& world, AgentId who) {
  const auto& s = world.sheet(who);
  return s.treasury_value(SecurityClass::Bill, world.marks()) + s.treasury_value(SecurityClass::Long, world.marks());
}

}  // namespace

VolumeDecomposition decompose(Amount seller, Amount retention, int chain_length) {
  VolumeDecomposition v;
  v.seller = seller;
  v.retention = retention;
  v.buyer = seller - retention;
  v.interdealer = chain_length >= 2 ? seller - retention : Amount::zero();
  v.gross = seller + v.interdealer * std::max(0, chain_length - 1) + v.buyer;
  return v;
}

VolumeDecomposition DealerChain::decompose(Amount seller) const {
  return parsim::decompose(seller, apply(seller, retention_frac), length());
}

SlrReport dealer_slr(const LedgerWorld& world, const DealerProfile& d, const SlrParams& params) {
  const auto& s = world.sheet(d.id);
  return slr(s.equity(), s.total_assets(), d.exposures, d.gsib, params);
}

Amount dealer_headroom(const LedgerWorld& world, const DealerProfile& d, const SlrParams& params) {
  const auto& s = world.sheet(d.id);
  if (!(s.total_assets() + d.exposures).is_positive()) {
    const Fraction bound = params.bound(d.gsib);
    if (!s.equity().is_positive() || bound.micros() <= 0) return d.extra_headroom;
    return divide_floor(s.equity(), bound) + d.extra_headroom;
  }
  return dealer_slr(world, d, params).headroom_assets + d.extra_headroom;
}

Fraction price_impact(Amount excess_flow, const MarketParams& params, SecurityClass cls) {
  if (!excess_flow.is_positive() || !params.depth.is_positive()) return Fraction::zero();
  if (cls == SecurityClass::Bill && params.flight_to_safety) return Fraction::zero();
  Fraction decline = params.impact_coeff * ratio(excess_flow, params.depth);
  if (cls == SecurityClass::Long) decline = decline * params.long_impact_multiplier;
  return std::min(decline, params.max_dislocation);
}

// ---------------------------------------------------------------------------

Market::Market(MarketParams params, std::vector<DealerProfile> dealers, std::vector<AgentId> cash_lenders)
    : params_(params), dealers_(std::move(dealers)), cash_lenders_(std::move(cash_lenders)) {
  std::sort(dealers_.begin(), dealers_.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(cash_lenders_.begin(), cash_lenders_.end());
}

const DealerProfile* Market::dealer(AgentId id) const {
  for (const auto& d : dealers_) {
    if (d.id == id) return &d;
  }
  return nullptr;
}

void Market::begin_day(int day) {
  day_ = day;
  committed_.clear();
  funding_used_.clear();
  seller_flow_.clear();
}

std::uint64_t Market::submit(const LedgerWorld& world, AgentId seller, SecurityClass cls, Amount face,
                             std::optional<std::uint64_t> gap_repo) {
  SaleOrder o;
  o.id = next_order_++;
  o.seller = seller;
  o.cls = cls;
  o.face = face;
  o.submitted_day = day_;
  o.gap_repo = gap_repo;
  seller_flow_[cls] += apply(face, world.marks().of(cls));
  orders_.push_back(o);
  return o.id;
}

void Market::cancel(std::uint64_t order_id) {
  std::erase_if(orders_, [&](const SaleOrder& o) { return o.id == order_id; });
}

std::vector<DealerCapacity> Market::dealer_capacity(const LedgerWorld& world) const {
  std::vector<DealerCapacity> out;
  for (const auto& d : dealers_) {
    if (!d.market_maker) continue;
    DealerCapacity c;
    c.id = d.id;
    const auto committed = committed_.contains(d.id) ? committed_.at(d.id) : Amount::zero();
    c.headroom = max(Amount::zero(), dealer_headroom(world, d, params_.slr) - committed);
    if (d.reserve_access) {
      const auto used = funding_used_.contains(d.id) ? funding_used_.at(d.id) : Amount::zero();
      c.private_room = max(Amount::zero(), *d.reserve_access - used);
    } else {
      c.private_room = c.headroom;
    }
    if (params_.srf_enabled) c.srf_room = free_treasury_value(world, d.id);
    c.cap = min(c.headroom, c.private_room + c.srf_room);
    out.push_back(c);
  }
  return out;
}

Amount Market::capacity(const LedgerWorld& world) const {
  Amount total;
  for (const auto& c : dealer_capacity(world)) total += c.cap;
  return total;
}

ClearingReport Market::clear(LedgerWorld& world) {
  ClearingReport report;
  auto caps = dealer_capacity(world);
  for (const auto& c : caps) report.capacity += c.cap;

  std::vector<std::size_t> order_idx(orders_.size());
  std::iota(order_idx.begin(), order_idx.end(), 0);
  std::stable_sort(order_idx.begin(), order_idx.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(orders_[a].seller, orders_[a].id) < std::tie(orders_[b].seller, orders_[b].id);
  });

  std::map<AgentId, Amount> srf_need;
  for (std::size_t oi : order_idx) {
    SaleOrder& order = orders_[oi];
    FillReport rep;
    rep.order_id = order.id;
    rep.requested_face = order.open_face();
    const Fraction price = world.marks().of(order.cls);

    Amount remaining_cap;
    std::vector<Amount> weights;
    for (const auto& c : caps) {
      const Amount w = c.id == order.seller ? Amount::zero() : c.cap;
      remaining_cap += w;
      weights.push_back(w);
    }
    const Amount open = order.open_face();
    if (remaining_cap.is_positive() && open.is_positive()) {
      const Amount order_value = apply(open, price);
      const Amount target = min(order_value, remaining_cap);
      const auto shares = allocate_pro_rata(target, weights);
      std::vector<Amount> faces(caps.size());
      Amount assigned;
      for (std::size_t i = 0; i < caps.size(); ++i) {
        faces[i] = min(divide_floor(shares[i], price), open - assigned);
        assigned += faces[i];
      }
      if (target == order_value && assigned < open) {
        const auto best = std::max_element(weights.begin(), weights.end());
        faces[static_cast<std::size_t>(best - weights.begin())] += open - assigned;
        assigned = open;
      }
      for (std::size_t i = 0; i < caps.size(); ++i) {
        if (!faces[i].is_positive()) continue;
        auto& c = caps[i];
        Fill f;
        f.order_id = order.id;
        f.seller = order.seller;
        f.dealer = c.id;
        f.cls = order.cls;
        f.face = faces[i];
        f.value = apply(faces[i], price);
        const Amount priv = min(f.value, c.private_room);
        f.srf = f.value - priv;
        f.trade_day = day_;
        f.settle_day = day_ + 1;
        f.gap_repo = order.gap_repo;
        c.private_room -= priv;
        c.srf_room = max(Amount::zero(), c.srf_room - f.srf);
        c.cap = max(Amount::zero(), c.cap - f.value);
        committed_[c.id] += f.value;
        funding_used_[c.id] += priv;
        if (f.srf.is_positive()) srf_need[c.id] += f.srf;
        rep.filled_face += f.face;
        rep.filled_value += f.value;
        rep.fills.push_back(f);
        unsettled_.push_back(f);
        world.emit("Fill")
            .with("order", static_cast<std::int64_t>(order.id))
            .with("seller", f.seller)
            .with("dealer", f.dealer)
            .with("class", std::string{to_string(f.cls)})
            .with("face", f.face)
            .with("value", f.value)
            .with("srf", f.srf)
            .with("settle_day", static_cast<std::int64_t>(f.settle_day));
      }
      order.filled_face += rep.filled_face;
    }
    rep.unfilled_face = order.open_face();
    report.by_class[order.cls].fills += rep.filled_value;
    report.reports.push_back(std::move(rep));
  }

  for (const auto& [dealer_id, amount] : srf_need) {
    const DealerProfile* d = dealer(dealer_id);
    try {
      srf_leg(world, *d, amount, params_.srf_enabled, params_.slr);
      srf_cash_[dealer_id] += amount;
      report.srf_draws += amount;
    } catch (const SrfError& e) {
      world.emit("SrfRefused").with("dealer", dealer_id).with("amount", amount).with("cause", std::string{e.what()});
    }
  }

  std::erase_if(orders_, [](const SaleOrder& o) { return !o.open_face().is_positive(); });
  for (const auto& o : orders_) report.by_class[o.cls].unfilled += apply(o.open_face(), world.marks().of(o.cls));
  Amount flow;
  for (SecurityClass cls : kClasses) {
    const Amount f = seller_flow_.contains(cls) ? seller_flow_.at(cls) : Amount::zero();
    report.by_class[cls].seller_flow = f;
    flow += f;
  }
  report.chain = parsim::decompose(flow, apply(flow, params_.retention_frac), params_.chain_length);
  seller_flow_.clear();
  last_ = report;
  return report;
}

void Market::pay_from_dealer(LedgerWorld& world, AgentId dealer_id, AgentId to, Amount amount, Amount srf_cash) {
  const Amount from_srf = min(srf_cash, amount);
  if (from_srf.is_positive()) srf_cash_[dealer_id] -= from_srf;
  // Funding and payout settle as one batch, so same-bank legs net out of reserves.
  PostingBatch b;
  const auto takes = funding_postings(world, dealer_id, amount - from_srf, b);
  b.label = "dealer payout";
  b.append(world.payment_postings(dealer_id, to, amount));
  world.apply(b);
  emit_funding(world, dealer_id, takes);
}

std::vector<std::pair<AgentId, Amount>> Market::funding_postings(const LedgerWorld& world, AgentId dealer_id,
                                                                 Amount amount, PostingBatch& b) const {
  std::vector<std::pair<AgentId, Amount>> takes;
  Amount raised;
  for (AgentId lender : cash_lenders_) {
    if (raised >= amount) break;
    if (lender == dealer_id) continue;
    const Amount take = min(world.spendable(lender), amount - raised);
    if (!take.is_positive()) continue;
    b.append(world.payment_postings(lender, dealer_id, take));
    b.append(world.claim_postings(lender, dealer_id, InstrumentKind::Repo, take));
    takes.emplace_back(lender, take);
    raised += take;
  }
  return takes;
}

void Market::emit_funding(LedgerWorld& world, AgentId dealer_id, const std::vector<std::pair<AgentId, Amount>>& takes) {
  for (const auto& [lender, take] : takes) {
    world.emit("DealerFunding").with("dealer", dealer_id).with("lender", lender).with("amount", take);
  }
}

Amount Market::fund_dealer(LedgerWorld& world, AgentId dealer_id, Amount amount) {
  PostingBatch b;
  const auto takes = funding_postings(world, dealer_id, amount, b);
  b.label = "dealer funding";
  world.apply(b);
  emit_funding(world, dealer_id, takes);
  Amount raised;
  for (const auto& [_, take] : takes) raised += take;
  return raised;
}

void Market::sweep(LedgerWorld& world) {
  for (const auto& d : dealers_) {
    const auto& s = world.sheet(d.id);
    const Amount base = base_reserves_.contains(d.id) ? base_reserves_.at(d.id) : Amount::zero();
    Amount held = srf_cash_.contains(d.id) ? srf_cash_.at(d.id) : Amount::zero();
    for (const auto& [_, st] : gaps_) {
      if (st.gap.borrower == d.id) held += st.proceeds;
    }
    Amount excess = world.spendable(d.id) - base - held;
    for (AgentId lender : cash_lenders_) {
      if (!excess.is_positive()) break;
      const Amount owed = s.position(Side::Liability, {InstrumentKind::Repo, SecurityClass::None, lender});
      const Amount repay = min(owed, excess);
      if (!repay.is_positive()) continue;
      PostingBatch b = world.payment_postings(d.id, lender, repay);
      b.label = "dealer funding repayment";
      b.append(world.claim_postings(lender, d.id, InstrumentKind::Repo, -repay));
      world.apply(b);
      excess -= repay;
    }
  }
}

void Market::settle_due(LedgerWorld& world, RepoBook& book, int day) {
  std::vector<Fill> keep;
  for (const auto& f : unsettled_) {
    if (f.settle_day > day) {
      keep.push_back(f);
      continue;
    }
    const Amount free_face = world.sheet(f.seller).position(Side::Asset, treasury_key(f.cls));
    if (free_face < f.face && f.gap_repo && book.find(*f.gap_repo) != nullptr) {
      release_collateral(world, book, *f.gap_repo, f.cls, f.face - free_face);
    }
    world.post_transfer(f.seller, f.dealer, Instrument::treasury(f.cls), f.face);
    RepoPosition* pos = f.gap_repo ? book.find(*f.gap_repo) : nullptr;
    auto gap = f.gap_repo ? gaps_.find(*f.gap_repo) : gaps_.end();
    if (pos != nullptr && gap != gaps_.end() && pos->borrower == f.seller) {
      settle_gap_fill(world, book, f, *pos, gap);
    } else {
      pay_from_dealer(world, f.dealer, f.seller, f.value, f.srf);
      if (gap != gaps_.end()) gap->second.proceeds += f.value;
    }
    world.emit("TradeSettled")
        .with("order", static_cast<std::int64_t>(f.order_id))
        .with("seller", f.seller)
        .with("dealer", f.dealer)
        .with("class", std::string{to_string(f.cls)})
        .with("face", f.face)
        .with("value", f.value);
  }
  unsettled_ = std::move(keep);
}

GapPlan Market::funding_gap_liquidation(LedgerWorld& world, const FundingGap& gap) {
  auto [it, inserted] = gaps_.try_emplace(gap.repo_id);
  GapState& st = it->second;
  if (inserted) {
    st.gap = gap;
  } else {
    st.gap.amount += gap.amount;
  }
  GapPlan plan;
  plan.replacement = apply(gap.amount, params_.replacement_frac);
  st.replacement += plan.replacement;
  const Amount residual = gap.amount - plan.replacement;
  if (residual.is_positive()) {
    const Amount long_value = apply(residual, gap.long_share);
    const Amount bill_value = residual - long_value;
    plan.long_face = long_value.is_positive() ? divide_ceil(long_value, world.marks().long_dated) : Amount::zero();
    plan.bill_face = bill_value.is_positive() ? divide_ceil(bill_value, world.marks().bill) : Amount::zero();
    if (plan.long_face.is_positive()) {
      plan.orders.push_back(submit(world, gap.borrower, SecurityClass::Long, plan.long_face, gap.repo_id));
    }
    if (plan.bill_face.is_positive()) {
      plan.orders.push_back(submit(world, gap.borrower, SecurityClass::Bill, plan.bill_face, gap.repo_id));
    }
    st.orders.insert(st.orders.end(), plan.orders.begin(), plan.orders.end());
  }
  world.emit("GapLiquidation")
      .with("repo", static_cast<std::int64_t>(gap.repo_id))
      .with("borrower", gap.borrower)
      .with("replacement", plan.replacement)
      .with("long_face", plan.long_face)
      .with("bill_face", plan.bill_face);
  return plan;
}

void Market::settle_gap_fill(LedgerWorld& world, RepoBook& book, const Fill& f, RepoPosition& pos,
                             std::map<std::uint64_t, GapState>::iterator gap) {
  // Proceeds of a gap sale go straight to the repo lender as early repayment.
  const Amount early = min(f.value, min(gap->second.gap.amount, pos.principal));
  const Amount from_srf = min(f.srf, f.value);
  if (from_srf.is_positive()) srf_cash_[f.dealer] -= from_srf;
  PostingBatch b;
  const auto takes = funding_postings(world, f.dealer, f.value - from_srf, b);
  b.label = "gap sale payout";
  b.append(world.payment_postings(f.dealer, pos.lender, early));
  b.append(world.claim_postings(pos.lender, pos.borrower, InstrumentKind::Repo, -early));
  if (f.value > early) b.append(world.payment_postings(f.dealer, f.seller, f.value - early));
  const bool closed = early == pos.principal;
  world.apply(b);
  if (closed) {
    const auto faces = pos.collateral_face;
    for (const auto& [cls, face] : faces) release_collateral(world, book, pos.id, cls, face);
  }
  emit_funding(world, f.dealer, takes);
  world.emit("RepoEarlyRepayment")
      .with("repo", static_cast<std::int64_t>(pos.id))
      .with("lender", pos.lender)
      .with("borrower", pos.borrower)
      .with("repaid", early)
      .with("remaining", pos.principal - early);

  early_repaid_.push_back({pos.id, pos.lender, early});
  GapState& st = gap->second;
  st.gap.amount -= early;
  st.replacement = min(st.replacement, st.gap.amount);
  if (closed) {
    book.erase(pos.id);
  } else {
    pos.principal -= early;
  }
  if (closed || !st.gap.amount.is_positive()) {
    for (auto id : st.orders) cancel(id);
    gaps_.erase(gap);
  }
}

std::vector<EarlyRepayment> Market::take_early_repayments() { return std::exchange(early_repaid_, {}); }

Amount Market::gap_outstanding(std::uint64_t repo_id) const {
  const auto it = gaps_.find(repo_id);
  return it == gaps_.end() ? Amount::zero() : it->second.gap.amount;
}

Amount Market::settle_gap(LedgerWorld& world, RepoBook& book, std::uint64_t repo_id, int today, Fraction roll_rate) {
  const RepoPosition* pos = book.find(repo_id);
  auto it = gaps_.find(repo_id);
  if (pos == nullptr || it == gaps_.end()) return Amount::zero();
  GapState& st = it->second;
  const AgentId borrower = pos->borrower;
  const Amount need = min(st.gap.amount, pos->principal);
  const Amount from_sales = min(st.proceeds, need);
  const Amount replacement = fund_dealer(world, borrower, min(st.replacement, need - from_sales));
  const Amount repay = from_sales + replacement;
  fund_dealer(world, borrower, pos->interest());
  settle_second_leg(world, book, repo_id, today, repay, roll_rate);

  st.proceeds -= from_sales;
  st.replacement -= min(st.replacement, replacement);
  st.gap.amount -= repay;
  if (!st.gap.amount.is_positive() || book.find(repo_id) == nullptr) {
    for (auto id : st.orders) cancel(id);
    gaps_.erase(it);
  } else {
    st.gap.due_day = book.find(repo_id)->second_leg_day;
  }
  return repay;
}

PriceUpdate Market::update_marks(LedgerWorld& world, RepoBook& book) {
  PriceUpdate out;
  out.before = world.marks();
  const Fraction ref = Fraction::one();
  const Fraction floor = ref - params_.max_dislocation;
  const auto unfilled = [&](SecurityClass cls) {
    const auto it = last_.by_class.find(cls);
    return it == last_.by_class.end() ? Amount::zero() : it->second.unfilled;
  };
  for (SecurityClass cls : kClasses) {
    const Fraction m = world.marks().of(cls);
    Fraction next = m;
    const Amount excess = unfilled(cls);
    if (cls == SecurityClass::Bill && params_.flight_to_safety) {
      if (unfilled(SecurityClass::Long).is_positive()) next = std::min(ref + params_.max_dislocation, m + params_.flight_bid);
    } else if (excess.is_positive()) {
      next = std::max(floor, m - price_impact(excess, params_, cls));
    } else if (m != ref) {
      next = m + (ref - m) * params_.mark_reversion;
      const Fraction gap = ref - next;
      if (gap <= Fraction::bp(1) && gap >= -Fraction::bp(1)) next = ref;
    }
    if (next != m) world.set_mark(cls, next);
  }
  out.margin_calls = check_margins(world, book);
  out.after = world.marks();
  return out;
}

Amount Market::pending_face(AgentId seller, SecurityClass cls) const {
  Amount total;
  for (const auto& o : orders_) {
    if (o.seller == seller && o.cls == cls) total += o.open_face();
  }
  for (const auto& f : unsettled_) {
    if (f.seller == seller && f.cls == cls) total += f.face;
  }
  return total;
}

Amount Market::pending_proceeds(const LedgerWorld& world, AgentId seller) const {
  Amount total;
  for (const auto& o : orders_) {
    if (o.seller == seller) total += apply(o.open_face(), world.marks().of(o.cls));
  }
  for (const auto& f : unsettled_) {
    if (f.seller == seller) total += f.value;
  }
  return total;
}

FillReport submit_sale(Market& market, LedgerWorld& world, AgentId seller, Amount face, SecurityClass cls) {
  const auto id = market.submit(world, seller, cls, face);
  const auto report = market.clear(world);
  for (const auto& r : report.reports) {
    if (r.order_id == id) return r;
  }
  return FillReport{id, face, {}, {}, face, {}};
}

}  // namespace parsim
