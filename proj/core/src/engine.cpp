#include <algorithm>
#include <map>
#include <sstream>

#include "json.hpp"
#include "parsim/scenario.hpp"

namespace parsim {

namespace {

using Json = nlohmann::ordered_json;

PositionKey treasury_key(SecurityClass cls) { return {InstrumentKind::Treasury, cls, std::nullopt}; }
PositionKey plain(InstrumentKind k) { return {k, SecurityClass::None, std::nullopt}; }

struct IssuerRt {
  const IssuerConfig* cfg = nullptr;
  AgentId id;
  IssuerDesk desk;
  ConfidenceState conf;
  RunModel model;
  IssuerSummary sum;

  Amount requested;
  Amount filled;
  Amount unfilled;
  Amount delayed_new;
  Amount intervention;
  std::optional<Fraction> int_target;
  Fraction int_fill;
  Fraction shock_effect;
  std::vector<RedemptionRequest> inbox;
};

struct AnalyticsRow {
  std::string agent;
  std::string line;
};

class Engine {
 public:
  explicit Engine(const ScenarioConfig& c) : c_(c), rng_(c.seed) {}

  RunOutput run() {
    build();
    check_audit(0);
    for (int d = 1; d <= c_.horizon_days; ++d) step(d);
    finish();
    return std::move(out_);
  }

 private:
  // ---- construction -------------------------------------------------------

  AgentId id(const std::string& name) const { return ids_.at(name); }

  void seed_claim(AgentId creditor, AgentId debtor, InstrumentKind kind, Amount amt) {
    if (!amt.is_positive()) return;
    world_.seed(creditor, Side::Asset, {kind, SecurityClass::None, debtor}, amt);
    world_.seed(debtor, Side::Liability, {kind, SecurityClass::None, creditor}, amt);
  }

  void seed_asset(AgentId who, const PositionKey& key, Amount amt) {
    if (amt.is_positive()) world_.seed(who, Side::Asset, key, amt);
  }

  void seed_liability(AgentId who, const PositionKey& key, Amount amt) {
    if (amt.is_positive()) world_.seed(who, Side::Liability, key, amt);
  }

  void build() {
    for (const auto& b : c_.banks) ids_[b.name] = world_.add_agent(AgentKind::Bank, b.name);
    for (const auto& d : c_.dealers) ids_[d.name] = world_.add_agent(AgentKind::BrokerDealer, d.name);
    for (const auto& i : c_.issuers) ids_[i.name] = world_.add_agent(AgentKind::Issuer, i.name);
    for (const auto& m : c_.intermediaries) {
      ids_[m.name] = world_.add_agent(AgentKind::Intermediary, m.name);
      intermediaries_.push_back(id(m.name));
      behavior_[id(m.name)] = m.behavior;
    }
    for (const auto& h : c_.holders) {
      ids_[h.name] = world_.add_agent(AgentKind::Holder, h.name);
      holders_.push_back(id(h.name));
    }
    for (const auto& t : c_.treasury_buyers) ids_[t.name] = world_.add_agent(AgentKind::TreasuryBuyer, t.name);

    std::map<AgentId, Amount> bank_deposits;
    const auto deposit = [&](AgentId who, const std::string& bank, Amount amt) {
      world_.sheet_mut(who).home_bank = id(bank);
      seed_claim(who, id(bank), InstrumentKind::Deposit, amt);
      bank_deposits[id(bank)] += amt;
    };

    for (const auto& b : c_.banks) seed_claim(id(b.name), kFed, InstrumentKind::Reserves, b.reserves);

    // Issuer repos are seeded as open positions against dealer inventory.
    std::map<AgentId, std::map<SecurityClass, Amount>> dealer_free;
    std::map<AgentId, Amount> dealer_repo_owed;
    for (const auto& d : c_.dealers) {
      dealer_free[id(d.name)] = {{SecurityClass::Bill, d.bill_inventory}, {SecurityClass::Long, d.long_inventory}};
    }
    for (const auto& i : c_.issuers) {
      const AgentId me = id(i.name);
      IssuerRt rt;
      rt.cfg = &i;
      rt.id = me;
      rt.model = c_.run_model;
      rt.sum.name = i.name;
      rt.desk.issuer = me;
      rt.desk.access = i.access;
      for (const auto& e : i.eligible) rt.desk.eligible.insert(id(e));
      rt.desk.policy = i.par_policy;
      rt.desk.genius_compliant = i.genius_compliant;
      rt.desk.mint_bill_share = i.mint_bill_share;
      rt.desk.mint_bill_maturity_days = i.bill_ladder.front().maturity_days;
      rt.desk.decline_negative_carry = i.decline_negative_carry;
      rt.desk.treasury_yield = i.treasury_yield;
      rt.desk.chains = i.chains;

      if (c_.policies.issuer_reserve_access) {
        world_.sheet_mut(me).reserve_account = true;
        if (!i.bank.empty()) world_.sheet_mut(me).home_bank = id(i.bank);
        seed_claim(me, kFed, InstrumentKind::Reserves, i.deposits);
      } else {
        deposit(me, i.bank, i.deposits);
      }
      seed_asset(me, treasury_key(SecurityClass::Bill), i.bills);
      seed_asset(me, treasury_key(SecurityClass::Long), i.long_dated);
      seed_asset(me, plain(InstrumentKind::OtherAssets), i.other);
      if (i.repo.is_positive()) {
        const AgentId dealer = id(i.repo_counterparty);
        auto& free = dealer_free[dealer];
        const auto faces =
            select_collateral(free, world_.marks(), required_collateral(i.repo, i.repo_terms.haircut), i.repo_terms.long_share);
        seed_claim(me, dealer, InstrumentKind::Repo, i.repo);
        for (const auto& [cls, face] : faces) {
          free[cls] -= face;
          seed_asset(dealer, {InstrumentKind::PledgedCollateral, cls, me}, face);
        }
        dealer_repo_owed[dealer] += i.repo;
        RepoPosition pos;
        pos.lender = me;
        pos.borrower = dealer;
        pos.principal = i.repo;
        pos.haircut = i.repo_terms.haircut;
        pos.rate = i.repo_terms.rate;
        pos.start_day = 0;
        pos.second_leg_day = i.repo_terms.term_days;
        pos.collateral_face = faces;
        book_.add(pos);
      }
      issuers_.push_back(std::move(rt));
    }

    std::vector<DealerProfile> profiles;
    for (const auto& d : c_.dealers) {
      const AgentId me = id(d.name);
      seed_claim(me, kFed, InstrumentKind::Reserves, d.reserves);
      for (const auto& [cls, face] : dealer_free[me]) seed_asset(me, treasury_key(cls), face);
      seed_asset(me, plain(InstrumentKind::OtherAssets), d.assets - d.reserves - d.bill_inventory - d.long_inventory);
      seed_liability(me, plain(InstrumentKind::OtherLiabilities), d.assets - d.capital - dealer_repo_owed[me]);
      DealerProfile p;
      p.id = me;
      p.exposures = d.exposures;
      p.gsib = d.gsib;
      p.reserve_access = d.reserve_access;
      p.market_maker = d.market_maker;
      profiles.push_back(p);
      dealers_.push_back(me);
    }
    if (c_.policies.eslr_reform) {
      std::vector<Amount> weights;
      for (const auto& p : profiles) weights.push_back(p.market_maker ? Amount{1} : Amount{});
      const auto extra = allocate_pro_rata(c_.policies.eslr_extra_headroom, weights);
      for (std::size_t k = 0; k < profiles.size(); ++k) profiles[k].extra_headroom = extra[k];
    }

    for (const auto& m : c_.intermediaries) deposit(id(m.name), m.bank, m.deposits);
    for (const auto& h : c_.holders) {
      deposit(id(h.name), h.bank, h.deposits);
      for (const auto& [issuer, amt] : h.coins) seed_claim(id(h.name), id(issuer), InstrumentKind::Stablecoin, amt);
    }
    std::vector<AgentId> lenders;
    std::map<std::pair<AgentId, SecurityClass>, Amount> sellable;
    for (const auto& t : c_.treasury_buyers) {
      const AgentId me = id(t.name);
      deposit(me, t.bank, t.deposits);
      seed_asset(me, treasury_key(SecurityClass::Bill), t.bills);
      seed_asset(me, treasury_key(SecurityClass::Long), t.long_dated);
      if (t.cash_lender) lenders.push_back(me);
      buyers_.push_back(me);
      sellable[{me, SecurityClass::Bill}] = t.bills;
      sellable[{me, SecurityClass::Long}] = t.long_dated;
    }
    for (const auto& d : c_.dealers) {
      sellable[{id(d.name), SecurityClass::Bill}] = dealer_free[id(d.name)][SecurityClass::Bill];
      sellable[{id(d.name), SecurityClass::Long}] = dealer_free[id(d.name)][SecurityClass::Long];
    }
    for (const auto& e : c_.exogenous_sales) {
      const AgentId seller = id(e.seller);
      if (seller.kind != AgentKind::TreasuryBuyer && seller.kind != AgentKind::BrokerDealer) {
        throw ValidationError("exogenous seller is a treasury buyer or dealer", e.seller);
      }
      auto& left = sellable[{seller, e.cls}];
      if (left < e.amount) throw ValidationError("exogenous sales within holdings", e.seller);
      left -= e.amount;
    }

    for (const auto& b : c_.banks) {
      const AgentId me = id(b.name);
      seed_asset(me, plain(InstrumentKind::Loans), bank_deposits[me] + b.capital - b.reserves);
    }
    seed_asset(kFed, plain(InstrumentKind::OtherAssets), world_.sheet(kFed).total_liabilities());

    market_ = Market(c_.market, profiles, lenders);
    for (const auto& d : c_.dealers) market_.set_base_reserves(id(d.name), d.reserves);
    for (const auto& rt : issuers_) targets_.push_back({rt.id, rt.cfg->name, rt.cfg->chains});
  }

  // ---- helpers ------------------------------------------------------------

  Amount frozen(AgentId holder, AgentId issuer) const {
    const auto it = frozen_.find({holder, issuer});
    return it == frozen_.end() ? Amount::zero() : it->second;
  }

  Amount free_coins(const IssuerRt& is, AgentId holder) const {
    return coins_held(world_, holder, is.id) - is.desk.pending_for(holder) - frozen(holder, is.id) -
           inbox_pending(is, holder);
  }

  static Amount inbox_pending(const IssuerRt& is, AgentId holder) {
    Amount t;
    for (const auto& r : is.inbox) {
      if (r.holder == holder) t += r.amount;
    }
    return t;
  }

  Amount live_coins(const IssuerRt& is) const {
    Amount t = coins_outstanding(world_, is.id);
    for (const auto& [key, amt] : frozen_) {
      if (key.second == is.id) t -= amt;
    }
    return t;
  }

  IssuerRt* issuer_of(AgentId id) {
    for (auto& rt : issuers_) {
      if (rt.id == id) return &rt;
    }
    return nullptr;
  }

  void check_audit(int day) {
    const AuditReport report = audit(world_);
    if (!report.ok()) throw AuditFailure(day, report);
    ++out_.summary.audits_passed;
    out_.closes.push_back(snapshot(world_));
  }

  // ---- phases -------------------------------------------------------------

  void shocks(int d) {
    for (const auto& spec : c_.shocks) {
      if (spec.day != d) continue;
      std::optional<AgentId> recipient;
      if (spec.recipient) recipient = id(*spec.recipient);
      ShockEffect e = apply_shock(spec, world_, targets_, recipient, rng_);
      for (const auto& [issuer, minted] : e.minted) frozen_[{*e.recipient, issuer}] += minted;
      effects_.push_back(std::move(e));
    }
    for (auto& e : effects_) {
      if (e.cls != ShockClass::UncontrolledSupply || e.expired || d < e.end_day) continue;
      const auto before = e.minted;
      expire_shock(e, world_);
      for (const auto& [issuer, minted] : before) {
        auto& f = frozen_[{*e.recipient, issuer}];
        f -= min(f, minted - e.minted.at(issuer));
        if (f.is_zero()) frozen_.erase({*e.recipient, issuer});
      }
    }
    for (auto& rt : issuers_) {
      rt.desk.liveness_blocked = false;
      rt.shock_effect = Fraction::zero();
      for (const auto& e : effects_) {
        if (!e.hits(rt.id) || !e.active(d)) continue;
        if (e.blocks(rt.id, d)) rt.desk.liveness_blocked = true;
        rt.shock_effect = std::max(rt.shock_effect, e.price_effect);
        rt.conf.last_shock = e.id;
      }
    }
  }

  void sell_to_intermediaries(IssuerRt& is, AgentId holder, Amount amount) {
    if (is.desk.liveness_blocked) {
      is.unfilled += amount;
      return;
    }
    const Fraction p = is.conf.secondary_price;
    Amount remaining = amount;
    for (AgentId m : intermediaries_) {
      if (!remaining.is_positive()) break;
      const Amount take = min(remaining, divide_floor(world_.spendable(m), p));
      if (!take.is_positive()) continue;
      PostingBatch b = world_.transfer_postings(holder, m, Instrument::coin(is.id), take);
      b.label = "secondary sale";
      b.append(world_.payment_postings(m, holder, apply(take, p)));
      world_.apply(b);
      remaining -= take;
    }
    if (remaining.is_positive()) {
      world_.emit("SecondaryUnfilled").with("issuer", is.id).with("holder", holder).with("amount", remaining);
    }
    is.unfilled += remaining;
  }

  void demand(IssuerRt& is) {
    std::vector<AgentId> who;
    std::vector<Amount> weights;
    Amount base;
    for (AgentId h : holders_) {
      const Amount f = free_coins(is, h);
      if (!f.is_positive()) continue;
      who.push_back(h);
      weights.push_back(f);
      base += f;
    }
    Amount want = redemption_demand(is.model, is.conf, base);
    if (c_.demand.noise.micros() > 0 && want.is_positive()) {
      want = apply(want, Fraction::one() + rng_.uniform(-c_.demand.noise, c_.demand.noise));
    }
    want = min(want, base);
    is.requested += want;
    const auto shares = allocate_pro_rata(want, weights);
    for (std::size_t k = 0; k < who.size(); ++k) {
      if (!shares[k].is_positive()) continue;
      if (is.desk.may_redeem_directly(who[k])) {
        is.inbox.push_back(make_request(is.desk, world_, who[k], shares[k]));
      } else {
        sell_to_intermediaries(is, who[k], shares[k]);
      }
    }
    for (AgentId m : intermediaries_) {
      if (behavior_.at(m) != IntermediaryBehavior::Redeem) continue;
      const Amount f = free_coins(is, m);
      if (f.is_positive()) is.inbox.push_back(make_request(is.desk, world_, m, f));
    }

    if (c_.demand.mint_rate.micros() > 0) {
      const std::optional<AgentId> seller = bill_seller();
      for (AgentId h : holders_) {
        const Amount amt = apply(coins_held(world_, h, is.id) - frozen(h, is.id), c_.demand.mint_rate);
        if (!amt.is_positive() || world_.spendable(h) < amt) continue;
        try {
          execute_mint(plan_mint(is.desk, h, amt, world_, is.conf.secondary_price, seller), world_);
          world_.emit("Mint").with("issuer", is.id).with("buyer", h).with("amount", amt);
        } catch (const SettlementError& e) {
          world_.emit("MintDeclined").with("issuer", is.id).with("buyer", h).with("reason", std::string{e.what()});
        }
      }
    }
  }

  std::optional<AgentId> bill_seller() const {
    for (AgentId t : buyers_) {
      if (world_.sheet(t).position(Side::Asset, treasury_key(SecurityClass::Bill)).is_positive()) return t;
    }
    return std::nullopt;
  }

  void intervention(IssuerRt& is) {
    is.int_target.reset();
    is.int_fill = Fraction::zero();
    for (const auto& action : intervene(is.desk.policy, is.conf.secondary_price, live_coins(is))) {
      std::vector<std::pair<AgentId, Amount>> cps;
      for (AgentId m : intermediaries_) cps.emplace_back(m, free_coins(is, m));
      for (AgentId h : holders_) cps.emplace_back(h, free_coins(is, h));
      if (action.kind == ActionKind::Mint) {
        for (auto& [cp, limit] : cps) limit = action.coins;
      }
      const Amount traded = execute_intervention(is.desk, action, world_, cps);
      is.intervention += traded;
      is.int_target = action.target;
      is.int_fill = std::min(Fraction::one(), ratio(traded, action.coins));
    }
  }

  void settle_repos(int d) {
    for (std::uint64_t rid : book_.maturing(d)) {
      const RepoPosition* pos = book_.find(rid);
      if (pos == nullptr) continue;
      const AgentId lender = pos->lender;
      if (market_.has_gap(rid)) {
        const Amount repaid = market_.settle_gap(world_, book_, rid, d, c_.repo_roll_rate);
        if (IssuerRt* is = issuer_of(lender)) {
          auto it = is->desk.recalled.find(rid);
          if (it != is->desk.recalled.end()) {
            it->second -= min(it->second, repaid);
            if (it->second.is_zero() || book_.find(rid) == nullptr) is->desk.recalled.erase(it);
          }
        }
      } else {
        market_.fund_dealer(world_, pos->borrower, pos->interest());
        roll_repo(world_, book_, rid, d, c_.repo_roll_rate);
      }
    }
  }

  void absorb(IssuerRt& is, const QueueStep& step) {
    for (const auto& c : step.completed) {
      is.filled += c.request.amount;
      is.sum.max_delay_days = std::max(is.sum.max_delay_days, c.delay_days);
    }
    is.delayed_new += step.newly_delayed_amount;
    for (auto rid : step.newly_delayed) {
      for (const auto& q : is.desk.queue) {
        if (q.request.id == rid && q.plan.funding == Funding::SellTreasuries) {
          is.sum.delayed_sell_treasuries += q.request.amount;
        }
      }
    }
  }

  void redemptions(IssuerRt& is, int d) {
    absorb(is, process_queue(is.desk, world_, market_, d));
    auto inbox = std::move(is.inbox);
    is.inbox.clear();
    for (const auto& req : inbox) {
      try {
        SettlementPlan plan = plan_redemption(is.desk, req, world_, market_, book_);
        absorb(is, execute_plan(is.desk, req, std::move(plan), world_, market_, book_));
      } catch (const SettlementError& e) {
        world_.emit("RedemptionRejected")
            .with("issuer", is.id)
            .with("holder", req.holder)
            .with("amount", req.amount)
            .with("reason", std::string{e.what()});
      }
    }
    top_up_funding(is.desk, world_, market_, book_);

    const Amount cost = min(is.cfg->operating_cost, world_.spendable(is.id) - is.desk.committed());
    if (cost.is_positive()) {
      const auto& s = world_.sheet(is.id);
      const AgentId rail = s.reserve_account ? kFed : *s.home_bank;
      const InstrumentKind kind = s.reserve_account ? InstrumentKind::Reserves : InstrumentKind::Deposit;
      PostingBatch b = world_.claim_postings(is.id, rail, kind, -cost);
      b.label = "operating cost";
      world_.apply(b);
    }
  }

  void step(int d) {
    world_.set_day(d);
    market_.begin_day(d);
    for (auto& rt : issuers_) {
      rt.requested = rt.filled = rt.unfilled = rt.delayed_new = rt.intervention = Amount::zero();
    }

    shocks(d);
    for (auto& rt : issuers_) demand(rt);
    for (auto& rt : issuers_) intervention(rt);

    market_.settle_due(world_, book_, d);
    for (const auto& e : market_.take_early_repayments()) {
      if (IssuerRt* is = issuer_of(e.lender)) {
        auto it = is->desk.recalled.find(e.repo_id);
        if (it == is->desk.recalled.end()) continue;
        it->second -= min(it->second, e.amount);
        if (it->second.is_zero() || book_.find(e.repo_id) == nullptr) is->desk.recalled.erase(it);
      }
    }
    settle_repos(d);
    for (auto& rt : issuers_) redemptions(rt, d);
    market_.sweep(world_);

    for (const auto& e : c_.exogenous_sales) {
      if (e.day == d) market_.submit(world_, id(e.seller), e.cls, e.amount);
    }
    const ClearingReport report = market_.clear(world_);

    const PriceMarks before = world_.marks();
    market_.update_marks(world_, book_);
    for (auto& rt : issuers_) {
      rt.conf.pending_delay_age = rt.desk.max_delay_age(d);
      PriceInputs in;
      in.unfilled = rt.unfilled + rt.desk.delayed_amount();
      in.coins = live_coins(rt);
      in.shock_effect = rt.shock_effect;
      in.mode = rt.desk.access;
      in.intervention_target = rt.int_target;
      in.intervention_fill = rt.int_fill;
      rt.conf = update_secondary_price(rt.conf, in, c_.price);
      if (rt.model.end_of_day(rt.conf)) {
        if (rt.model.state == Sensitivity::Sensitive) {
          if (!rt.sum.regime_flip_day) rt.sum.regime_flip_day = d;
          world_.emit("RegimeShift").with("issuer", rt.id).with("state", "Sensitive");
        } else {
          if (!rt.sum.regime_recovery_day) rt.sum.regime_recovery_day = d;
          world_.emit("RegimeShift").with("issuer", rt.id).with("state", "Insensitive");
        }
      }
    }

    record(d, report, before);
    check_audit(d);
  }

  // ---- analytics and emission ---------------------------------------------

  Amount excess_collateral(AgentId issuer) const {
    Amount t;
    for (const auto* p : book_.lent_by(issuer)) t += max(Amount::zero(), p->collateral_value(world_.marks()) - p->principal);
    return t;
  }

  PortfolioState portfolio(const IssuerRt& rt, int d) const {
    PortfolioState p;
    const auto& s = world_.sheet(rt.id);
    p.d = world_.spendable(rt.id);
    p.r_t = rt.cfg->treasury_yield;
    for (const auto* r : book_.lent_by(rt.id)) p.repo.push_back(*r);
    const Amount bills = s.position(Side::Asset, treasury_key(SecurityClass::Bill));
    std::vector<Amount> weights;
    for (const auto& b : rt.cfg->bill_ladder) weights.push_back(Amount{b.share.micros()});
    const auto faces = allocate_pro_rata(bills, weights);
    for (std::size_t k = 0; k < faces.size(); ++k) {
      p.ladder.push_back({faces[k], d + rt.cfg->bill_ladder[k].maturity_days, world_.marks().bill, true});
    }
    p.ladder.push_back({s.position(Side::Asset, treasury_key(SecurityClass::Long)), d + rt.cfg->long_maturity_days,
                        world_.marks().long_dated, true});
    return p;
  }

  void record(int d, const ClearingReport& report, const PriceMarks& before) {
    RunSummary& sum = out_.summary;
    std::vector<AnalyticsRow> rows;
    for (auto& rt : issuers_) {
      const auto& s = world_.sheet(rt.id);
      IssuerDay row;
      row.day = d;
      row.issuer = rt.cfg->name;
      row.price = rt.conf.secondary_price;
      row.deviation_bp = rt.conf.deviation_bp();
      row.regime = rt.model.state;
      row.coins = coins_outstanding(world_, rt.id);
      row.requested = rt.requested;
      row.filled = rt.filled;
      row.unfilled = rt.unfilled;
      row.delayed_new = rt.delayed_new;
      row.delayed_outstanding = rt.desk.delayed_amount();
      row.delay_age = rt.desk.max_delay_age(d);
      row.queue = rt.desk.queue.size();
      row.capacity = report.capacity;
      Amount assets = s.total_assets();
      Amount equity = s.equity();
      if (c_.policies.excess_collateral_as_capital) {
        assets += excess_collateral(rt.id);
        equity += excess_collateral(rt.id);
      }
      try {
        const LeverageReport lev = leverage_ratio(assets, row.coins);
        row.leverage = lev.ratio;
        row.band = std::string{to_string(lev.band)};
      } catch (const AnalyticsError&) {
        row.band = "n/a";
      }
      row.equity = equity;
      row.liveness_blocked = rt.desk.liveness_blocked;
      row.intervention = rt.intervention;

      IssuerSummary& is = rt.sum;
      is.peak_deviation_bp = std::max(is.peak_deviation_bp, row.deviation_bp);
      is.min_price = std::min(is.min_price, row.price);
      is.max_delay_days = std::max(is.max_delay_days, row.delay_age);
      if (!is.insolvency_day && equity.is_negative()) is.insolvency_day = d;
      is.requested += row.requested;
      is.filled += row.filled;
      is.delayed_total += row.delayed_new;
      is.final_coins = row.coins;
      sum.delayed_total += row.delayed_new;

      const LiquidityReport liq = liquidity_metrics(portfolio(rt, d), d);
      std::ostringstream a;
      a << d << ',' << rt.cfg->name << ",issuer," << row.leverage.to_string() << ',' << row.band << ",,,,"
        << liq.dla_frac.to_string() << ',' << liq.wla_frac.to_string() << ',' << liq.wam_days.to_string() << ','
        << liq.wal_days.to_string() << '\n';
      rows.push_back({rt.cfg->name, a.str()});
      out_.daily.push_back(std::move(row));
    }
    for (const auto& d_cfg : c_.dealers) {
      const DealerProfile* p = market_.dealer(id(d_cfg.name));
      const SlrReport r = dealer_slr(world_, *p, c_.market.slr);
      std::ostringstream a;
      a << d << ',' << d_cfg.name << ",dealer,,," << r.slr.to_string() << ',' << r.lower_bound.to_string() << ','
        << c_.unit.format(dealer_headroom(world_, *p, c_.market.slr)) << ",,,,\n";
      rows.push_back({d_cfg.name, a.str()});
    }
    std::sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) { return x.agent < y.agent; });
    for (const auto& r : rows) analytics_ << r.line;

    MarketDay m;
    m.day = d;
    m.bill_price = world_.marks().bill;
    m.long_price = world_.marks().long_dated;
    m.clearing = report;
    if (d == 1) {
      sum.min_capacity = sum.max_capacity = report.capacity;
    } else {
      sum.min_capacity = min(sum.min_capacity, report.capacity);
      sum.max_capacity = max(sum.max_capacity, report.capacity);
    }
    sum.srf_draws += report.srf_draws;
    sum.seller_flow += report.chain.seller;
    if (m.bill_price < before.bill) sum.bill_non_decreasing = false;
    sum.min_bill_price = std::min(sum.min_bill_price, m.bill_price);
    sum.max_bill_price = std::max(sum.max_bill_price, m.bill_price);
    sum.min_long_price = std::min(sum.min_long_price, m.long_price);
    out_.market.push_back(std::move(m));
  }

  void finish() {
    RunSummary& sum = out_.summary;
    sum.name = c_.name;
    sum.seed = c_.seed;
    sum.days = c_.horizon_days;
    sum.chain = decompose(sum.seller_flow, apply(sum.seller_flow, c_.market.retention_frac), c_.market.chain_length);
    sum.long_decline_bp = (Fraction::one() - sum.min_long_price).to_bp();
    for (const auto& ch : c_.chains) {
      if (!ch.attack_cost.is_positive()) continue;
      Amount at_risk;
      for (const auto& rt : issuers_) {
        if (std::find(rt.cfg->chains.begin(), rt.cfg->chains.end(), ch.id) != rt.cfg->chains.end()) {
          at_risk += coins_outstanding(world_, rt.id);
        }
      }
      sum.attack_incentive.emplace_back(ch.id, attack_incentive_ratio(at_risk, ch.attack_cost));
    }
    for (const auto& rt : issuers_) sum.issuers.push_back(rt.sum);
    emit_files();
  }

  void emit_files() {
    const UnitScale& u = c_.unit;
    std::ostringstream daily;
    daily << "day,issuer,price,deviation_bp,regime,coins,requested,filled,unfilled,delayed_new,delayed_outstanding,"
             "delay_age,queue,capacity,leverage,band,equity,liveness_blocked,intervention\n";
    for (const auto& r : out_.daily) {
      daily << r.day << ',' << r.issuer << ',' << r.price.to_string() << ',' << r.deviation_bp << ','
            << to_string(r.regime) << ',' << u.format(r.coins) << ',' << u.format(r.requested) << ','
            << u.format(r.filled) << ',' << u.format(r.unfilled) << ',' << u.format(r.delayed_new) << ','
            << u.format(r.delayed_outstanding) << ',' << r.delay_age << ',' << r.queue << ',' << u.format(r.capacity)
            << ',' << r.leverage.to_string() << ',' << r.band << ',' << u.format(r.equity) << ','
            << (r.liveness_blocked ? 1 : 0) << ',' << u.format(r.intervention) << '\n';
    }
    out_.daily_csv = daily.str();

    out_.analytics_csv = "day,agent,kind,leverage,band,slr,slr_bound,headroom,dla,wla,wam_days,wal_days\n" +
                         analytics_.str();

    std::ostringstream mk;
    mk << "day,bill_price,long_price,bill_flow,long_flow,bill_fills,long_fills,bill_unfilled,long_unfilled,capacity,"
          "srf_draws,chain_seller,chain_retention,chain_interdealer,chain_buyer,chain_gross\n";
    for (const auto& m : out_.market) {
      const auto cls = [&](SecurityClass c) {
        const auto it = m.clearing.by_class.find(c);
        return it == m.clearing.by_class.end() ? ClassStats{} : it->second;
      };
      const ClassStats b = cls(SecurityClass::Bill);
      const ClassStats l = cls(SecurityClass::Long);
      const VolumeDecomposition& v = m.clearing.chain;
      mk << m.day << ',' << m.bill_price.to_string() << ',' << m.long_price.to_string() << ',' << u.format(b.seller_flow)
         << ',' << u.format(l.seller_flow) << ',' << u.format(b.fills) << ',' << u.format(l.fills) << ','
         << u.format(b.unfilled) << ',' << u.format(l.unfilled) << ',' << u.format(m.clearing.capacity) << ','
         << u.format(m.clearing.srf_draws) << ',' << u.format(v.seller) << ',' << u.format(v.retention) << ','
         << u.format(v.interdealer) << ',' << u.format(v.buyer) << ',' << u.format(v.gross) << '\n';
    }
    out_.market_csv = mk.str();

    const RunSummary& s = out_.summary;
    Json j;
    j["name"] = s.name;
    j["seed"] = s.seed;
    j["days"] = s.days;
    j["unit_cents"] = u.cents_per_unit;
    j["audits_passed"] = s.audits_passed;
    Json issuers = Json::array();
    for (const auto& is : s.issuers) {
      Json x;
      x["name"] = is.name;
      x["peak_deviation_bp"] = is.peak_deviation_bp;
      x["min_price"] = is.min_price.to_string();
      x["max_delay_days"] = is.max_delay_days;
      x["insolvency_day"] = is.insolvency_day ? Json(*is.insolvency_day) : Json(nullptr);
      x["regime_flip_day"] = is.regime_flip_day ? Json(*is.regime_flip_day) : Json(nullptr);
      x["regime_recovery_day"] = is.regime_recovery_day ? Json(*is.regime_recovery_day) : Json(nullptr);
      x["requested"] = u.format(is.requested);
      x["filled"] = u.format(is.filled);
      x["delayed_total"] = u.format(is.delayed_total);
      x["delayed_sell_treasuries"] = u.format(is.delayed_sell_treasuries);
      x["final_coins"] = u.format(is.final_coins);
      issuers.push_back(std::move(x));
    }
    j["issuers"] = std::move(issuers);
    Json totals;
    totals["delayed_total"] = u.format(s.delayed_total);
    totals["srf_draws"] = u.format(s.srf_draws);
    totals["min_capacity"] = u.format(s.min_capacity);
    totals["max_capacity"] = u.format(s.max_capacity);
    j["totals"] = std::move(totals);
    Json treas;
    treas["min_bill_price"] = s.min_bill_price.to_string();
    treas["max_bill_price"] = s.max_bill_price.to_string();
    treas["min_long_price"] = s.min_long_price.to_string();
    treas["bill_non_decreasing"] = s.bill_non_decreasing;
    treas["long_decline_bp"] = s.long_decline_bp;
    j["treasuries"] = std::move(treas);
    Json chain;
    chain["seller"] = u.format(s.chain.seller);
    chain["retention"] = u.format(s.chain.retention);
    chain["interdealer"] = u.format(s.chain.interdealer);
    chain["buyer"] = u.format(s.chain.buyer);
    chain["gross"] = u.format(s.chain.gross);
    j["chain"] = std::move(chain);
    Json inc = Json::object();
    for (const auto& [ch, r] : s.attack_incentive) inc[ch] = r.to_string();
    j["attack_incentive"] = std::move(inc);
    out_.summary_json = j.dump(2) + "\n";

    std::string ev;
    for (const auto& e : world_.events.entries()) {
      ev += e.to_json();
      ev += '\n';
    }
    out_.events_jsonl = std::move(ev);
  }

  const ScenarioConfig& c_;
  LedgerWorld world_;
  RepoBook book_;
  Market market_;
  Rng rng_;
  std::map<std::string, AgentId> ids_;
  std::vector<IssuerRt> issuers_;
  std::vector<AgentId> holders_;
  std::vector<AgentId> intermediaries_;
  std::vector<AgentId> buyers_;
  std::vector<AgentId> dealers_;
  std::map<AgentId, IntermediaryBehavior> behavior_;
  std::map<std::pair<AgentId, AgentId>, Amount> frozen_;
  std::vector<ShockEffect> effects_;
  std::vector<ShockTarget> targets_;
  std::ostringstream analytics_;
  RunOutput out_;
};

}  // namespace

RunOutput run(const ScenarioConfig& config) { return Engine(config).run(); }

}  // namespace parsim
