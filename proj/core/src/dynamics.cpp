#include "parsim/dynamics.hpp"

#include <algorithm>

namespace parsim {

std::string_view to_string(Sensitivity s) { return s == Sensitivity::Sensitive ? "Sensitive" : "Insensitive"; }

Fraction ConfidenceState::deviation() const {
  const Fraction d = Fraction::one() - secondary_price;
  return d < Fraction::zero() ? -d : d;
}

void RunModel::validate() const {
  if (shifted_rate <= baseline_rate) throw std::invalid_argument("shifted_rate must exceed baseline_rate");
  if (deviation_threshold_bp <= 0) throw std::invalid_argument("deviation_threshold must be positive");
  if (baseline_rate < Fraction::zero() || shifted_rate > Fraction::one()) {
    throw std::invalid_argument("redemption rates must lie in [0, 1]");
  }
  if (recovery_days < 1) throw std::invalid_argument("recovery_days must be at least 1");
  if (delay_trigger_days < 1) throw std::invalid_argument("delay_trigger_days must be at least 1");
  if (form == RegimeForm::Smooth && smooth_width_bp <= 0) throw std::invalid_argument("smooth_width must be positive");
}

bool RunModel::triggered(const ConfidenceState& conf) const {
  return conf.deviation() >= Fraction::bp(deviation_threshold_bp) || conf.pending_delay_age >= delay_trigger_days;
}

Fraction RunModel::rate(const ConfidenceState& conf) const {
  if (state == Sensitivity::Sensitive || triggered(conf)) return shifted_rate;
  if (form == RegimeForm::Step) return baseline_rate;
  const Fraction lo = Fraction::bp(deviation_threshold_bp - smooth_width_bp);
  const Fraction x = conf.deviation() - lo;
  if (x <= Fraction::zero()) return baseline_rate;
  Fraction s = ratio(Amount{x.micros()}, Amount{Fraction::bp(smooth_width_bp).micros()});
  s = std::min(s, Fraction::one());
  const Fraction s2 = s * s;
  const Fraction smooth = s2 * Fraction::from_micros(3'000'000) - s2 * s * Fraction::from_micros(2'000'000);
  return baseline_rate + (shifted_rate - baseline_rate) * smooth;
}

bool RunModel::end_of_day(const ConfidenceState& conf) {
  if (triggered(conf)) {
    calm_days = 0;
    if (state == Sensitivity::Sensitive) return false;
    state = Sensitivity::Sensitive;
    return true;
  }
  if (state == Sensitivity::Insensitive) return false;
  if (conf.secondary_price == Fraction::one() && conf.pending_delay_age == 0) {
    if (++calm_days >= recovery_days) {
      state = Sensitivity::Insensitive;
      calm_days = 0;
      return true;
    }
  } else {
    calm_days = 0;
  }
  return false;
}

Amount redemption_demand(RunModel& model, const ConfidenceState& conf, Amount coins) {
  if (model.triggered(conf)) {
    model.state = Sensitivity::Sensitive;
    model.calm_days = 0;
  }
  if (!coins.is_positive()) return Amount::zero();
  return apply(coins, model.rate(conf));
}

ConfidenceState update_secondary_price(const ConfidenceState& conf, const PriceInputs& in, const PriceParams& params) {
  ConfidenceState out = conf;
  const Fraction par = Fraction::one();
  Fraction pressure;
  if (in.coins.is_positive() && in.unfilled.is_positive()) {
    pressure = params.unfilled_coeff * ratio(min(in.unfilled, in.coins), in.coins);
  }
  pressure = pressure + params.delay_coeff * Fraction::from_micros(1'000'000LL * conf.pending_delay_age);

  Fraction p;
  if (in.mode == AccessMode::Direct) {
    p = par - pressure;
  } else {
    Fraction base = conf.secondary_price;
    if (in.intervention_target && *in.intervention_target > base) {
      base = base + (*in.intervention_target - base) * std::clamp(in.intervention_fill, Fraction::zero(), par);
    }
    if (pressure > Fraction::zero()) {
      p = base - pressure;
    } else {
      p = base + (par - base) * params.reversion;
      const Fraction gap = par - p;
      if (gap <= params.snap && gap >= -params.snap) p = par;
    }
  }
  if (in.shock_effect > Fraction::zero()) p = std::min(p, par - in.shock_effect);
  out.secondary_price = std::max(p, params.floor);
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(ShockClass c) {
  switch (c) {
    case ShockClass::LivenessFault: return "LivenessFault";
    case ShockClass::UncontrolledSupply: return "UncontrolledSupply";
    case ShockClass::ConfidenceOnly: return "ConfidenceOnly";
    case ShockClass::CorrelatedLiveness: return "CorrelatedLiveness";
  }
  return "?";
}

std::string_view to_string(LikelihoodBand b) {
  switch (b) {
    case LikelihoodBand::Most: return "Most";
    case LikelihoodBand::Moderate: return "Moderate";
    case LikelihoodBand::Least: return "Least";
  }
  return "?";
}

std::string_view to_string(SystemicBand b) {
  switch (b) {
    case SystemicBand::High: return "High";
    case SystemicBand::Medium: return "Medium";
    case SystemicBand::Low: return "Low";
  }
  return "?";
}

ShockClass parse_shock_class(std::string_view s) {
  for (auto c : {ShockClass::LivenessFault, ShockClass::UncontrolledSupply, ShockClass::ConfidenceOnly,
                 ShockClass::CorrelatedLiveness}) {
    if (to_string(c) == s) return c;
  }
  throw ShockError(ShockErrc::UnknownShockClass, "unknown shock class '" + std::string{s} + "'");
}

LikelihoodBand parse_likelihood(std::string_view s) {
  for (auto b : {LikelihoodBand::Most, LikelihoodBand::Moderate, LikelihoodBand::Least}) {
    if (to_string(b) == s) return b;
  }
  throw ShockError(ShockErrc::UnknownBand, "unknown likelihood band '" + std::string{s} + "'");
}

SystemicBand parse_systemic(std::string_view s) {
  for (auto b : {SystemicBand::High, SystemicBand::Medium, SystemicBand::Low}) {
    if (to_string(b) == s) return b;
  }
  throw ShockError(ShockErrc::UnknownBand, "unknown systemic band '" + std::string{s} + "'");
}

std::pair<Fraction, Fraction> attack_band(SystemicBand b) {
  switch (b) {
    case SystemicBand::High: return {Fraction::pct_hundredths(1350), Fraction::pct_hundredths(3000)};
    case SystemicBand::Medium: return {Fraction::pct_hundredths(750), Fraction::pct_hundredths(1350)};
    case SystemicBand::Low: return {Fraction::pct_hundredths(350), Fraction::pct_hundredths(750)};
  }
  return {Fraction::zero(), Fraction::zero()};
}

Fraction attack_magnitude(SystemicBand b, Rng& rng) {
  const auto [lo, hi] = attack_band(b);
  return rng.uniform(lo, hi);
}

bool ShockEffect::hits(AgentId issuer) const {
  return std::find(issuers.begin(), issuers.end(), issuer) != issuers.end();
}

bool ShockEffect::blocks(AgentId issuer, int day) const {
  const bool liveness = cls == ShockClass::LivenessFault || cls == ShockClass::CorrelatedLiveness;
  return liveness && active(day) && hits(issuer);
}

ShockEffect apply_shock(const ShockSpec& spec, LedgerWorld& world, const std::vector<ShockTarget>& targets,
                        std::optional<AgentId> recipient, Rng& rng) {
  ShockEffect e;
  e.id = spec.id;
  e.cls = spec.cls;
  e.start_day = world.clock().day;
  const bool fan_out = spec.cls == ShockClass::CorrelatedLiveness || !spec.issuer;
  for (const auto& t : targets) {
    const bool on_chain = std::find(t.chains.begin(), t.chains.end(), spec.chain) != t.chains.end();
    if (fan_out ? on_chain : t.name == *spec.issuer) e.issuers.push_back(t.issuer);
  }
  std::sort(e.issuers.begin(), e.issuers.end());
  if (e.issuers.empty()) throw ShockError(ShockErrc::NoTarget, "shock '" + spec.id + "' matches no issuer");

  switch (spec.cls) {
    case ShockClass::LivenessFault:
    case ShockClass::CorrelatedLiveness:
      e.end_day = e.start_day + std::max(1, spec.duration) - 1;
      break;
    case ShockClass::ConfidenceOnly:
      e.end_day = e.start_day + std::max(1, spec.duration) - 1;
      e.price_effect = spec.magnitude ? *spec.magnitude : attack_magnitude(spec.systemic, rng);
      break;
    case ShockClass::UncontrolledSupply: {
      if (!recipient) throw ShockError(ShockErrc::NoTarget, "shock '" + spec.id + "' needs a recipient");
      e.end_day = e.start_day + std::max(0, spec.duration);
      e.price_effect = spec.price_effect.value_or(kDefaultSupplyPriceEffect);
      e.recipient = recipient;
      const Fraction mag = spec.magnitude.value_or(kDefaultSupplyMagnitude);
      for (AgentId issuer : e.issuers) {
        const Amount minted = apply(coins_outstanding(world, issuer), mag);
        if (!minted.is_positive()) continue;
        PostingBatch b = world.claim_postings(*recipient, issuer, InstrumentKind::Stablecoin, minted);
        b.label = "uncontrolled mint";
        world.apply(b);
        e.minted[issuer] = minted;
      }
      break;
    }
  }
  auto& ev = world.emit("Shock")
                 .with("id", spec.id)
                 .with("class", std::string{to_string(spec.cls)})
                 .with("end_day", static_cast<std::int64_t>(e.end_day))
                 .with("price_effect_micros", e.price_effect.micros());
  for (AgentId i : e.issuers) ev.with("issuer", i);
  for (const auto& [i, m] : e.minted) ev.with("minted", m);
  return e;
}

void expire_shock(ShockEffect& effect, LedgerWorld& world) {
  if (effect.expired) return;
  effect.expired = true;
  if (!effect.recipient) return;
  for (auto& [issuer, minted] : effect.minted) {
    const Amount burn = min(minted, coins_held(world, *effect.recipient, issuer));
    if (!burn.is_positive()) continue;
    PostingBatch b = world.claim_postings(*effect.recipient, issuer, InstrumentKind::Stablecoin, -burn);
    b.label = "burn";
    world.apply(b);
    world.emit("Burn").with("id", effect.id).with("issuer", issuer).with("amount", burn);
    minted -= burn;
  }
}

Fraction attack_incentive_ratio(Amount value_at_risk_per_day, Amount attack_cost) {
  if (!attack_cost.is_positive()) throw std::invalid_argument("attack cost must be positive");
  return ratio(value_at_risk_per_day, attack_cost);
}

}  // namespace parsim
