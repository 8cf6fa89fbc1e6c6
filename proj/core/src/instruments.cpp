#include "parsim/instruments.hpp"

#include <algorithm>
#include <array>

namespace parsim {

namespace {

PositionKey treasury_key(SecurityClass cls) { return {InstrumentKind::Treasury, cls, std::nullopt}; }

PositionKey pledged_key(SecurityClass cls, AgentId lender) { return {InstrumentKind::PledgedCollateral, cls, lender}; }

constexpr std::array<SecurityClass, 2> kClasses = {SecurityClass::Long, SecurityClass::Bill};

Amount face_of(const std::map<SecurityClass, Amount>& m, SecurityClass cls) {
  const auto it = m.find(cls);
  return it == m.end() ? Amount::zero() : it->second;
}

Amount value_of_faces(const std::map<SecurityClass, Amount>& faces, const PriceMarks& marks) {
  Amount total;
  for (const auto& [cls, face] : faces) total += apply(face, marks.of(cls));
  return total;
}

}  // namespace

std::map<SecurityClass, Amount> select_collateral(const std::map<SecurityClass, Amount>& available,
                                                  const PriceMarks& marks, Amount required, Fraction long_share) {
  std::map<SecurityClass, Amount> out;
  if (!required.is_positive()) return out;
  const Fraction ml = marks.of(SecurityClass::Long);
  const Fraction mb = marks.of(SecurityClass::Bill);
  const Amount avail_l = face_of(available, SecurityClass::Long);
  const Amount avail_b = face_of(available, SecurityClass::Bill);

  Amount face_l = min(avail_l, divide_ceil(apply_ceil(required, long_share), ml));
  Amount rem = required - apply(face_l, ml);
  Amount face_b;
  if (rem.is_positive()) face_b = min(avail_b, divide_ceil(rem, mb));
  rem = required - apply(face_l, ml) - apply(face_b, mb);
  if (rem.is_positive()) face_l = min(avail_l, face_l + divide_ceil(rem, ml));

  const Amount got = apply(face_l, ml) + apply(face_b, mb);
  if (got < required) {
    throw InstrumentError(InstrumentErrc::InsufficientCollateral,
                          "collateral worth " + got.to_string() + " below required " + required.to_string());
  }
  if (face_l.is_positive()) out[SecurityClass::Long] = face_l;
  if (face_b.is_positive()) out[SecurityClass::Bill] = face_b;
  return out;
}

namespace {

std::map<SecurityClass, Amount> free_treasuries(const LedgerWorld& world, AgentId agent) {
  const auto& s = world.sheet(agent);
  std::map<SecurityClass, Amount> out;
  for (SecurityClass cls : kClasses) out[cls] = s.position(Side::Asset, treasury_key(cls));
  return out;
}

void add_pledge_changes(PostingBatch& b, AgentId borrower, AgentId lender, const std::map<SecurityClass, Amount>& from,
                        const std::map<SecurityClass, Amount>& to) {
  for (SecurityClass cls : kClasses) {
    const Amount delta = face_of(to, cls) - face_of(from, cls);
    if (delta.is_zero()) continue;
    b.add({borrower, Side::Asset, treasury_key(cls), -delta});
    b.add({borrower, Side::Asset, pledged_key(cls, lender), delta});
  }
}

Fraction long_share_of(const RepoPosition& pos, const PriceMarks& marks) {
  const Amount total = pos.collateral_value(marks);
  if (!total.is_positive()) return Fraction::pct_hundredths(7500);
  return ratio(apply(face_of(pos.collateral_face, SecurityClass::Long), marks.long_dated), total);
}

void require_day(const RepoPosition& pos, int today) {
  if (today != pos.second_leg_day) {
    throw InstrumentError(InstrumentErrc::WrongDay, "repo " + std::to_string(pos.id) + " second leg is day " +
                                                        std::to_string(pos.second_leg_day) + ", not " +
                                                        std::to_string(today));
  }
}

RepoPosition& require_repo(RepoBook& book, std::uint64_t id) {
  RepoPosition* pos = book.find(id);
  if (pos == nullptr) throw InstrumentError(InstrumentErrc::UnknownRepo, "unknown repo " + std::to_string(id));
  return *pos;
}

}  // namespace

void check_bill(const TreasuryBill& bill, int today, bool genius_compliant) {
  if (bill.market_price.micros() <= 0) throw InstrumentError(InstrumentErrc::IneligibleMaturity, "bill price must be positive");
  if (bill.maturity_day < today) throw InstrumentError(InstrumentErrc::IneligibleMaturity, "bill already matured");
  if (genius_compliant && bill.maturity_day - today > kGeniusMaxMaturityDays) {
    throw InstrumentError(InstrumentErrc::IneligibleMaturity,
                          "bill maturity " + std::to_string(bill.maturity_day - today) + " days exceeds 93");
  }
}

Amount RepoPosition::collateral_value(const PriceMarks& marks) const { return value_of_faces(collateral_face, marks); }

Amount RepoPosition::interest() const {
  return Amount{div_round_half_even(static_cast<__int128>(principal.cents()) * rate.micros() * term(), Fraction::kScale)};
}

Amount required_collateral(Amount principal, Fraction haircut) { return apply_ceil(principal, Fraction::one() + haircut); }

Amount default_loss(Amount principal, Fraction haircut, Fraction decline) {
  if (decline <= haircut) return Amount::zero();
  return apply(principal, decline - haircut);
}

// ---------------------------------------------------------------------------

RepoPosition& RepoBook::add(RepoPosition pos) {
  pos.id = next_id_++;
  return positions_.emplace(pos.id, std::move(pos)).first->second;
}

RepoPosition* RepoBook::find(std::uint64_t id) {
  const auto it = positions_.find(id);
  return it == positions_.end() ? nullptr : &it->second;
}

const RepoPosition* RepoBook::find(std::uint64_t id) const {
  const auto it = positions_.find(id);
  return it == positions_.end() ? nullptr : &it->second;
}

void RepoBook::erase(std::uint64_t id) { positions_.erase(id); }

std::vector<std::uint64_t> RepoBook::maturing(int day) const {
  std::vector<std::uint64_t> out;
  for (const auto& [id, p] : positions_) {
    if (p.second_leg_day == day) out.push_back(id);
  }
  return out;
}

std::vector<const RepoPosition*> RepoBook::lent_by(AgentId lender) const {
  std::vector<const RepoPosition*> out;
  for (const auto& [_, p] : positions_) {
    if (p.lender == lender) out.push_back(&p);
  }
  return out;
}

std::vector<const RepoPosition*> RepoBook::borrowed_by(AgentId borrower) const {
  std::vector<const RepoPosition*> out;
  for (const auto& [_, p] : positions_) {
    if (p.borrower == borrower) out.push_back(&p);
  }
  return out;
}

Amount RepoBook::principal_lent(AgentId lender) const {
  Amount total;
  for (const auto& [_, p] : positions_) {
    if (p.lender == lender) total += p.principal;
  }
  return total;
}

// ---------------------------------------------------------------------------

const RepoPosition& open_reverse_repo(LedgerWorld& world, RepoBook& book, AgentId lender, AgentId borrower,
                                      Amount principal, const RepoTerms& terms) {
  if (terms.term_days < 1) throw InstrumentError(InstrumentErrc::InvalidTerm, "repo term must be at least one day");
  if (!principal.is_positive()) throw InstrumentError(InstrumentErrc::InsufficientCash, "repo principal must be positive");
  if (world.spendable(lender) < principal) {
    throw InstrumentError(InstrumentErrc::InsufficientCash, lender.to_string() + " cannot fund repo of " +
                                                                principal.to_string());
  }
  const Amount required = required_collateral(principal, terms.haircut);
  const auto faces = select_collateral(free_treasuries(world, borrower), world.marks(), required, terms.long_share);

  PostingBatch b = world.payment_postings(lender, borrower, principal);
  b.label = "repo first leg";
  b.append(world.claim_postings(lender, borrower, InstrumentKind::Repo, principal));
  add_pledge_changes(b, borrower, lender, {}, faces);
  world.apply(b);

  RepoPosition pos;
  pos.lender = lender;
  pos.borrower = borrower;
  pos.principal = principal;
  pos.haircut = terms.haircut;
  pos.rate = terms.rate;
  pos.start_day = world.clock().day;
  pos.second_leg_day = pos.start_day + terms.term_days;
  pos.collateral_face = faces;
  const RepoPosition& out = book.add(std::move(pos));
  world.emit("RepoOpen")
      .with("repo", static_cast<std::int64_t>(out.id))
      .with("lender", lender)
      .with("borrower", borrower)
      .with("principal", principal)
      .with("collateral", out.collateral_value(world.marks()))
      .with("second_leg_day", static_cast<std::int64_t>(out.second_leg_day));
  return out;
}

Amount settle_second_leg(LedgerWorld& world, RepoBook& book, std::uint64_t id, int today, Amount repay,
                         Fraction new_rate) {
  RepoPosition& pos = require_repo(book, id);
  require_day(pos, today);
  if (repay.is_negative() || repay > pos.principal) {
    throw InstrumentError(InstrumentErrc::InsufficientCash, "repayment outside [0, principal]");
  }
  const Amount interest = pos.interest();
  const Amount cash = interest + repay;
  if (world.spendable(pos.borrower) < cash) {
    throw InstrumentError(InstrumentErrc::InsufficientCash,
                          pos.borrower.to_string() + " cannot pay second leg of " + cash.to_string());
  }
  const Amount remaining = pos.principal - repay;
  std::map<SecurityClass, Amount> faces;
  if (remaining.is_positive()) {
    auto available = free_treasuries(world, pos.borrower);
    for (const auto& [cls, f] : pos.collateral_face) available[cls] += f;
    faces = select_collateral(available, world.marks(), required_collateral(remaining, pos.haircut),
                              long_share_of(pos, world.marks()));
  }

  PostingBatch b = world.payment_postings(pos.borrower, pos.lender, cash);
  b.label = "repo second leg";
  b.append(world.claim_postings(pos.lender, pos.borrower, InstrumentKind::Repo, -repay));
  add_pledge_changes(b, pos.borrower, pos.lender, pos.collateral_face, faces);
  world.apply(b);

  world.emit("RepoSecondLeg")
      .with("repo", static_cast<std::int64_t>(pos.id))
      .with("lender", pos.lender)
      .with("borrower", pos.borrower)
      .with("repaid", repay)
      .with("interest", interest)
      .with("rolled", remaining);
  if (remaining.is_positive()) {
    const int term = pos.term();
    pos.principal = remaining;
    pos.rate = new_rate;
    pos.start_day = today;
    pos.second_leg_day = today + term;
    pos.collateral_face = std::move(faces);
  } else {
    book.erase(id);
  }
  return interest;
}

SettlementOutcome close_or_default_repo(LedgerWorld& world, RepoBook& book, std::uint64_t id, int today,
                                        bool counterparty_performs, Fraction market_decline) {
  RepoPosition& pos = require_repo(book, id);
  require_day(pos, today);
  SettlementOutcome out;
  if (counterparty_performs) {
    out.principal_returned = pos.principal;
    out.interest = settle_second_leg(world, book, id, today, pos.principal, pos.rate);
    return out;
  }
  out.performed = false;
  out.loss = default_loss(pos.principal, pos.haircut, market_decline);
  out.collateral_seized = pos.collateral_face;

  PostingBatch b = world.claim_postings(pos.lender, pos.borrower, InstrumentKind::Repo, -pos.principal);
  b.label = "repo default";
  for (const auto& [cls, face] : pos.collateral_face) {
    b.add({pos.borrower, Side::Asset, pledged_key(cls, pos.lender), -face});
    b.add({pos.lender, Side::Asset, treasury_key(cls), face});
  }
  world.apply(b);
  world.emit("RepoDefault")
      .with("repo", static_cast<std::int64_t>(pos.id))
      .with("lender", pos.lender)
      .with("borrower", pos.borrower)
      .with("principal", pos.principal)
      .with("loss", out.loss);
  book.erase(id);
  return out;
}

const RepoPosition& roll_repo(LedgerWorld& world, RepoBook& book, std::uint64_t id, int today, Fraction new_rate) {
  settle_second_leg(world, book, id, today, Amount::zero(), new_rate);
  return *book.find(id);
}

Amount release_collateral(LedgerWorld& world, RepoBook& book, std::uint64_t id, SecurityClass cls, Amount face) {
  RepoPosition& pos = require_repo(book, id);
  const Amount released = min(face, face_of(pos.collateral_face, cls));
  if (!released.is_positive()) return Amount::zero();
  auto next = pos.collateral_face;
  next[cls] = next[cls] - released;
  if (next[cls].is_zero()) next.erase(cls);
  PostingBatch b{"collateral release", {}};
  add_pledge_changes(b, pos.borrower, pos.lender, pos.collateral_face, next);
  world.apply(b);
  pos.collateral_face = std::move(next);
  return released;
}

FundingGap decline_roll(LedgerWorld& world, const RepoPosition& pos, Amount amount) {
  FundingGap gap{pos.id, pos.borrower, pos.lender, min(amount, pos.principal), pos.second_leg_day,
                 long_share_of(pos, world.marks())};
  world.emit("FundingGap")
      .with("repo", static_cast<std::int64_t>(pos.id))
      .with("borrower", pos.borrower)
      .with("lender", pos.lender)
      .with("amount", gap.amount)
      .with("due_day", static_cast<std::int64_t>(gap.due_day));
  return gap;
}

std::vector<MarginCall> check_margins(LedgerWorld& world, RepoBook& book) {
  std::vector<MarginCall> calls;
  for (auto& [id, pos] : book.positions_mut()) {
    if (pos.overnight()) continue;
    const Fraction half = Fraction::from_micros(div_round_half_even(pos.haircut.micros(), 2));
    const Amount threshold = apply(pos.principal, Fraction::one() + half);
    const Amount value = pos.collateral_value(world.marks());
    if (value >= threshold) continue;

    MarginCall call{id, pos.borrower, required_collateral(pos.principal, pos.haircut) - value, false};
    auto available = free_treasuries(world, pos.borrower);
    for (const auto& [cls, f] : pos.collateral_face) available[cls] += f;
    try {
      auto faces = select_collateral(available, world.marks(), required_collateral(pos.principal, pos.haircut),
                                     long_share_of(pos, world.marks()));
      PostingBatch b{"margin top-up", {}};
      add_pledge_changes(b, pos.borrower, pos.lender, pos.collateral_face, faces);
      world.apply(b);
      pos.collateral_face = std::move(faces);
      call.met = true;
    } catch (const InstrumentError&) {
      call.met = false;
    }
    world.emit("MarginCall")
        .with("repo", static_cast<std::int64_t>(id))
        .with("borrower", pos.borrower)
        .with("shortfall", call.shortfall)
        .with("met", call.met);
    calls.push_back(call);
  }
  return calls;
}

std::vector<MarginCall> mark_treasuries(LedgerWorld& world, RepoBook& book, SecurityClass cls, Fraction tick) {
  if (tick.micros() != 0) world.set_mark(cls, world.marks().of(cls) + tick);
  return check_margins(world, book);
}

std::vector<MarginCall> mark_treasuries(LedgerWorld& world, RepoBook& book, Fraction tick) {
  if (tick.micros() != 0) {
    world.set_mark(SecurityClass::Bill, world.marks().bill + tick);
    world.set_mark(SecurityClass::Long, world.marks().long_dated + tick);
  }
  return check_margins(world, book);
}

// ---------------------------------------------------------------------------

Amount PortfolioState::repo_principal() const {
  Amount total;
  for (const auto& r : repo) total += r.principal;
  return total;
}

Amount PortfolioState::total() const { return treasuries() + d + repo_principal() + income; }

PortfolioState step_portfolio(const PortfolioState& p, Fraction price_change, Amount deposit_change) {
  PortfolioState next = p;
  const Amount interest_t = apply(p.treasuries() + p.repo_principal(), p.r_t);
  const Amount interest_d = apply(p.d, p.r_d);
  next.income = p.income + interest_t + interest_d;
  next.t_price = p.t_price + price_change;
  next.d = p.d + deposit_change;
  for (auto& bill : next.ladder) bill.market_price = bill.market_price + price_change;
  return next;
}

}  // namespace parsim
