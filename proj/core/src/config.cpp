#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "config_internal.hpp"

namespace parsim {

using detail::Json;

namespace {

ParseError field_error(const std::string& path, const std::string& what) {
  return ParseError("field " + path + ": " + what, 0, path);
}

// Typed access to one JSON object. Every key read is remembered so unknown
// keys can be reported once the section is done.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw field_error(path_.empty() ? "/" : path_, "expected an object");
  }

  const std::string& path() const { return path_; }
  std::string at(const std::string& key) const { return path_ + "/" + key; }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : j_.items()) out.push_back(k);
    return out;
  }

  double number(const std::string& key, double dflt) {
    if (!has(key)) return dflt;
    const Json& v = j_.at(key);
    if (!v.is_number()) throw field_error(at(key), "expected a number");
    return v.get<double>();
  }

  double required_number(const std::string& key) {
    if (!has(key)) throw field_error(at(key), "required");
    return number(key, 0);
  }

  std::int64_t integer(const std::string& key, std::int64_t dflt) {
    if (!has(key)) return dflt;
    const Json& v = j_.at(key);
    if (!v.is_number_integer()) throw field_error(at(key), "expected an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(const std::string& key, std::uint64_t dflt) {
    if (!has(key)) return dflt;
    const Json& v = j_.at(key);
    if (!v.is_number_unsigned()) throw field_error(at(key), "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool dflt) {
    if (!has(key)) return dflt;
    const Json& v = j_.at(key);
    if (!v.is_boolean()) throw field_error(at(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& dflt) {
    if (!has(key)) return dflt;
    const Json& v = j_.at(key);
    if (!v.is_string()) throw field_error(at(key), "expected a string");
    return v.get<std::string>();
  }

  std::string required_string(const std::string& key) {
    if (!has(key)) throw field_error(at(key), "required");
    return string(key, {});
  }

  Fraction fraction(const std::string& key, Fraction dflt) {
    if (!has(key)) return dflt;
    return Fraction::from_double(number(key, 0));
  }

  std::vector<std::string> strings(const std::string& key) {
    std::vector<std::string> out;
    if (!has(key)) return out;
    const Json& v = j_.at(key);
    if (!v.is_array()) throw field_error(at(key), "expected an array of strings");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) throw field_error(at(key) + "/" + std::to_string(i), "expected a string");
      out.push_back(v[i].get<std::string>());
    }
    return out;
  }

  // Visits each element of an array of objects.
  template <typename F>
  void each(const std::string& key, F&& f) {
    if (!has(key)) return;
    const Json& v = j_.at(key);
    if (!v.is_array()) throw field_error(at(key), "expected an array");
    for (std::size_t i = 0; i < v.size(); ++i) {
      Section s(v[i], at(key) + "/" + std::to_string(i));
      f(s);
      s.finish();
    }
  }

  template <typename F>
  void child(const std::string& key, F&& f) {
    if (!has(key)) return;
    Section s(j_.at(key), at(key));
    f(s);
    s.finish();
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.contains(k)) throw ValidationError("unknown field", path_ + "/" + k);
    }
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

struct Reader {
  UnitScale unit;

  Amount amount(Section& s, const std::string& key, Amount dflt = {}) {
    if (!s.has(key)) return dflt;
    const Amount a = unit.to_amount(s.number(key, 0));
    if (a.is_negative()) throw ValidationError("non-negative amount", s.at(key));
    return a;
  }
  Amount required_amount(Section& s, const std::string& key) {
    if (!s.has(key)) throw field_error(s.at(key), "required");
    return amount(s, key);
  }
};

Fraction checked_unit_fraction(Section& s, const std::string& key, Fraction dflt) {
  const Fraction f = s.fraction(key, dflt);
  if (f < Fraction::zero() || f > Fraction::one()) throw ValidationError("fraction in [0, 1]", s.at(key));
  return f;
}

SecurityClass parse_class(const std::string& s, const std::string& path) {
  if (s == "bill") return SecurityClass::Bill;
  if (s == "long") return SecurityClass::Long;
  throw ValidationError("security class is bill or long", path);
}

int line_of(std::string_view text, std::size_t byte) {
  const auto end = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n'));
}

Json parse_text(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    const int line = line_of(text, e.byte > 0 ? e.byte - 1 : 0);
    throw ParseError("syntax error at line " + std::to_string(line) + ": " + e.what(), line, "");
  }
}

void parse_agents(Section& a, Reader& rd, ScenarioConfig& c) {
  a.each("banks", [&](Section& s) {
    BankConfig b;
    b.name = s.required_string("name");
    b.reserves = rd.amount(s, "reserves");
    b.capital = rd.amount(s, "capital");
    c.banks.push_back(b);
  });
  a.each("dealers", [&](Section& s) {
    DealerConfig d;
    d.name = s.required_string("name");
    d.capital = rd.required_amount(s, "capital");
    d.assets = rd.required_amount(s, "assets");
    d.exposures = rd.amount(s, "exposures");
    d.reserves = rd.amount(s, "reserves");
    d.gsib = s.boolean("gsib", true);
    if (s.has("reserve_access")) d.reserve_access = rd.amount(s, "reserve_access");
    s.child("inventory", [&](Section& inv) {
      d.bill_inventory = rd.amount(inv, "bill");
      d.long_inventory = rd.amount(inv, "long");
    });
    d.market_maker = s.boolean("market_maker", true);
    c.dealers.push_back(d);
  });
  a.each("issuers", [&](Section& s) {
    IssuerConfig i;
    i.name = s.required_string("name");
    i.bank = s.string("bank", "");
    i.assets = rd.required_amount(s, "assets");
    s.child("allocations", [&](Section& al) {
      i.deposits = rd.amount(al, "deposits");
      i.bills = rd.amount(al, "bills");
      i.long_dated = rd.amount(al, "long");
      i.repo = rd.amount(al, "repo");
      i.other = rd.amount(al, "other");
    });
    s.child("repo", [&](Section& r) {
      i.repo_counterparty = r.string("counterparty", "");
      i.repo_terms.haircut = checked_unit_fraction(r, "haircut", i.repo_terms.haircut);
      i.repo_terms.term_days = static_cast<int>(r.integer("term_days", i.repo_terms.term_days));
      i.repo_terms.rate = r.fraction("rate", i.repo_terms.rate);
      i.repo_terms.long_share = checked_unit_fraction(r, "long_share", i.repo_terms.long_share);
    });
    s.each("bill_ladder", [&](Section& b) {
      BillBucket bucket;
      bucket.share = checked_unit_fraction(b, "share", Fraction::one());
      bucket.maturity_days = static_cast<int>(b.integer("maturity_days", 30));
      i.bill_ladder.push_back(bucket);
    });
    i.long_maturity_days = static_cast<int>(s.integer("long_maturity_days", i.long_maturity_days));
    const std::string access = s.string("access", "direct");
    if (access == "direct") {
      i.access = AccessMode::Direct;
    } else if (access == "intermediated") {
      i.access = AccessMode::Intermediated;
    } else {
      throw ValidationError("access is direct or intermediated", s.at("access"));
    }
    i.eligible = s.strings("eligible");
    i.chains = s.strings("chains");
    i.genius_compliant = s.boolean("genius_compliant", true);
    s.child("par_policy", [&](Section& p) {
      const std::string mode = p.string("mode", "rigorous_fixed");
      if (mode == "rigorous_fixed") {
        i.par_policy.mode = ParMode::RigorousFixed;
      } else if (mode == "corridor") {
        i.par_policy.mode = ParMode::Corridor;
      } else if (mode == "best_effort") {
        i.par_policy.mode = ParMode::BestEffort;
      } else {
        throw ValidationError("par policy mode", p.at("mode"));
      }
      i.par_policy.corridor_bp = static_cast<int>(p.integer("corridor_bp", i.par_policy.corridor_bp));
      i.par_policy.supply_response = p.fraction("supply_response", i.par_policy.supply_response);
    });
    i.mint_bill_share = checked_unit_fraction(s, "mint_bill_share", i.mint_bill_share);
    i.operating_cost = rd.amount(s, "operating_cost_per_day");
    i.decline_negative_carry = s.boolean("decline_negative_carry", true);
    i.treasury_yield = s.fraction("treasury_yield", i.treasury_yield);
    c.issuers.push_back(i);
  });
  a.each("intermediaries", [&](Section& s) {
    IntermediaryConfig m;
    m.name = s.required_string("name");
    m.bank = s.required_string("bank");
    m.deposits = rd.amount(s, "deposits");
    const std::string b = s.string("behavior", "redeem");
    if (b == "redeem") {
      m.behavior = IntermediaryBehavior::Redeem;
    } else if (b == "warehouse") {
      m.behavior = IntermediaryBehavior::Warehouse;
    } else {
      throw ValidationError("intermediary behavior is redeem or warehouse", s.at("behavior"));
    }
    c.intermediaries.push_back(m);
  });
  a.each("holders", [&](Section& s) {
    HolderConfig h;
    h.name = s.required_string("name");
    h.bank = s.required_string("bank");
    h.deposits = rd.amount(s, "deposits");
    s.child("coins", [&](Section& coins) {
      for (const auto& k : coins.keys()) h.coins.emplace_back(k, rd.required_amount(coins, k));
    });
    c.holders.push_back(h);
  });
  a.each("treasury_buyers", [&](Section& s) {
    TreasuryBuyerConfig t;
    t.name = s.required_string("name");
    t.bank = s.required_string("bank");
    t.deposits = rd.amount(s, "deposits");
    t.bills = rd.amount(s, "bills");
    t.long_dated = rd.amount(s, "long");
    t.cash_lender = s.boolean("cash_lender", true);
    c.treasury_buyers.push_back(t);
  });
}

template <typename T>
void sort_by_name(std::vector<T>& v) {
  std::stable_sort(v.begin(), v.end(), [](const T& a, const T& b) { return a.name < b.name; });
}

void validate(ScenarioConfig& c) {
  if (c.horizon_days < 1) throw ValidationError("horizon≥1");

  std::map<std::string, std::string> kinds;
  const auto declare = [&](const std::string& name, const char* kind) {
    if (name.empty()) throw ValidationError("agent name non-empty", kind);
    if (!kinds.emplace(name, kind).second) throw ValidationError("duplicate agent name", name);
  };
  for (const auto& x : c.banks) declare(x.name, "bank");
  for (const auto& x : c.dealers) declare(x.name, "dealer");
  for (const auto& x : c.issuers) declare(x.name, "issuer");
  for (const auto& x : c.intermediaries) declare(x.name, "intermediary");
  for (const auto& x : c.holders) declare(x.name, "holder");
  for (const auto& x : c.treasury_buyers) declare(x.name, "treasury_buyer");
  const auto require = [&](const std::string& name, const char* kind, const std::string& where) {
    const auto it = kinds.find(name);
    if (it == kinds.end() || it->second != kind) {
      throw ValidationError("unknown reference", where + " -> " + std::string{kind} + " '" + name + "'");
    }
  };

  std::map<std::string, Amount> bank_deposits;
  for (const auto& h : c.holders) {
    require(h.bank, "bank", "holder " + h.name);
    bank_deposits[h.bank] += h.deposits;
    for (const auto& [issuer, amt] : h.coins) require(issuer, "issuer", "holder " + h.name + " coins");
  }
  for (const auto& m : c.intermediaries) {
    require(m.bank, "bank", "intermediary " + m.name);
    bank_deposits[m.bank] += m.deposits;
  }
  for (const auto& t : c.treasury_buyers) {
    require(t.bank, "bank", "treasury buyer " + t.name);
    bank_deposits[t.bank] += t.deposits;
  }

  std::map<std::string, Amount> dealer_collateral;
  for (auto& i : c.issuers) {
    if (i.deposits + i.bills + i.long_dated + i.repo + i.other != i.assets) {
      throw ValidationError("allocations≠assets", i.name);
    }
    if (!c.policies.issuer_reserve_access || !i.bank.empty()) {
      if (i.bank.empty()) throw ValidationError("issuer bank required", i.name);
      require(i.bank, "bank", "issuer " + i.name);
    }
    if (!c.policies.issuer_reserve_access) bank_deposits[i.bank] += i.deposits;
    if (i.repo.is_positive()) {
      require(i.repo_counterparty, "dealer", "issuer " + i.name + " repo");
      if (i.repo_terms.term_days < 1) throw ValidationError("repo term≥1", i.name);
      dealer_collateral[i.repo_counterparty] += required_collateral(i.repo, i.repo_terms.haircut);
    }
    if (i.bill_ladder.empty()) i.bill_ladder.push_back({Fraction::one(), 30});
    Fraction total;
    for (const auto& b : i.bill_ladder) {
      total = total + b.share;
      if (b.maturity_days < 1) throw ValidationError("bill maturity≥1", i.name);
      if (i.genius_compliant && b.maturity_days > kGeniusMaxMaturityDays) {
        throw ValidationError("bill maturity exceeds 93 days for a GENIUS-compliant issuer", i.name);
      }
    }
    if (total != Fraction::one()) throw ValidationError("bill ladder shares sum to 1", i.name);
    if (i.par_policy.mode == ParMode::Corridor && i.par_policy.corridor_bp <= 0) {
      throw ValidationError("corridor width positive", i.name);
    }
    if (i.par_policy.supply_response < Fraction::zero()) throw ValidationError("supply response non-negative", i.name);
    for (const auto& e : i.eligible) {
      if (!kinds.contains(e)) throw ValidationError("unknown reference", "issuer " + i.name + " eligible '" + e + "'");
    }
    std::sort(i.eligible.begin(), i.eligible.end());
    std::sort(i.chains.begin(), i.chains.end());
  }
  for (const auto& b : c.banks) {
    if (bank_deposits[b.name] + b.capital < b.reserves) throw ValidationError("bank loans non-negative", b.name);
  }
  for (const auto& d : c.dealers) {
    if (d.capital > d.assets) throw ValidationError("dealer capital≤assets", d.name);
    if (d.reserves + d.bill_inventory + d.long_inventory > d.assets) {
      throw ValidationError("dealer assets cover reserves and inventory", d.name);
    }
    const Amount repo_owed = [&] {
      Amount t;
      for (const auto& i : c.issuers) {
        if (i.repo_counterparty == d.name) t += i.repo;
      }
      return t;
    }();
    if (d.capital + repo_owed > d.assets) throw ValidationError("dealer liabilities non-negative", d.name);
    const auto it = dealer_collateral.find(d.name);
    if (it != dealer_collateral.end() && d.bill_inventory + d.long_inventory < it->second) {
      throw ValidationError("repo collateral within dealer inventory", d.name);
    }
  }

  if (c.market.chain_length < 1) throw ValidationError("chain length≥1");
  if (c.market.retention_frac < Fraction::zero() || c.market.retention_frac >= Fraction::one()) {
    throw ValidationError("retention in [0, 1)");
  }
  if (c.market.long_impact_multiplier < Fraction::one()) throw ValidationError("long impact multiplier≥1");
  if (!c.market.depth.is_positive()) throw ValidationError("market depth positive");
  try {
    c.run_model.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError("run model", e.what());
  }
  if (c.price.floor <= Fraction::zero()) throw ValidationError("price floor positive");

  std::set<std::string> chain_ids;
  for (const auto& ch : c.chains) {
    if (!chain_ids.insert(ch.id).second) throw ValidationError("duplicate chain", ch.id);
  }
  std::set<std::string> shock_ids;
  for (const auto& s : c.shocks) {
    if (!shock_ids.insert(s.id).second) throw ValidationError("duplicate shock id", s.id);
    if (s.day < 1 || s.day > c.horizon_days) throw ValidationError("shock day within horizon", s.id);
    if (s.duration < 0) throw ValidationError("shock duration non-negative", s.id);
    if (s.issuer) require(*s.issuer, "issuer", "shock " + s.id);
    if (s.recipient) {
      const auto it = kinds.find(*s.recipient);
      if (it == kinds.end() || (it->second != "holder" && it->second != "intermediary")) {
        throw ValidationError("unknown reference", "shock " + s.id + " recipient '" + *s.recipient + "'");
      }
    }
    if (s.cls == ShockClass::UncontrolledSupply && !s.recipient) {
      throw ValidationError("uncontrolled supply shock needs a recipient", s.id);
    }
    if ((s.cls == ShockClass::CorrelatedLiveness || !s.issuer) && s.chain.empty()) {
      throw ValidationError("chain-wide shock needs a chain", s.id);
    }
    if (s.magnitude && *s.magnitude < Fraction::zero()) throw ValidationError("shock magnitude non-negative", s.id);
  }
  for (const auto& e : c.exogenous_sales) {
    const auto it = kinds.find(e.seller);
    if (it == kinds.end()) throw ValidationError("unknown reference", "exogenous sale seller '" + e.seller + "'");
    if (e.day < 1 || e.day > c.horizon_days) throw ValidationError("exogenous sale day within horizon", e.seller);
  }

  sort_by_name(c.banks);
  sort_by_name(c.dealers);
  sort_by_name(c.issuers);
  sort_by_name(c.intermediaries);
  sort_by_name(c.holders);
  sort_by_name(c.treasury_buyers);
  for (auto& h : c.holders) std::sort(h.coins.begin(), h.coins.end());
  std::stable_sort(c.shocks.begin(), c.shocks.end(),
                   [](const ShockSpec& a, const ShockSpec& b) { return std::tie(a.day, a.id) < std::tie(b.day, b.id); });
  std::stable_sort(c.exogenous_sales.begin(), c.exogenous_sales.end(), [](const ExogenousSale& a, const ExogenousSale& b) {
    return std::tie(a.day, a.seller, a.cls, a.amount) < std::tie(b.day, b.seller, b.cls, b.amount);
  });
  std::sort(c.chains.begin(), c.chains.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
}

}  // namespace

Amount UnitScale::to_amount(double units) const {
  const double cents = std::nearbyint(units * static_cast<double>(cents_per_unit));
  if (!(std::fabs(cents) < 9.0e18)) throw ValidationError("amount in range");
  return Amount{static_cast<std::int64_t>(cents)};
}

std::string UnitScale::format(Amount a) const {
  int digits = 0;
  for (std::int64_t p = cents_per_unit; p > 1; p /= 10) ++digits;
  const bool neg = a.is_negative();
  const auto mag = static_cast<std::uint64_t>(neg ? -static_cast<__int128>(a.cents()) : a.cents());
  const auto scale = static_cast<std::uint64_t>(cents_per_unit);
  std::string out = (neg ? "-" : "") + std::to_string(mag / scale);
  if (digits > 0) {
    auto frac = std::to_string(mag % scale);
    frac.insert(0, static_cast<std::size_t>(digits) - frac.size(), '0');
    out += "." + frac;
  }
  return out;
}

namespace detail {

Json merged_json(std::string_view text) {
  Json j = parse_text(text);
  if (!j.is_object()) throw ParseError("config must be a JSON object", 1, "/");
  if (j.contains("preset")) {
    if (!j.at("preset").is_string()) throw field_error("/preset", "expected a string");
    const std::string name = j.at("preset").get<std::string>();
    Json base = parse_text(preset_json(name));
    Json patch = j;
    patch.erase("preset");
    base.merge_patch(patch);
    return base;
  }
  return j;
}

ScenarioConfig config_from_json(const Json& j) {
  ScenarioConfig c;
  Section top(j, "");
  top.string("description", "");
  c.name = top.string("name", c.name);
  c.seed = top.unsigned_integer("seed", 0);
  c.horizon_days = static_cast<int>(top.integer("horizon_days", c.horizon_days));
  top.child("unit", [&](Section& u) { c.unit.cents_per_unit = u.integer("cents_per_unit", 100); });
  {
    std::int64_t p = c.unit.cents_per_unit;
    while (p > 1 && p % 10 == 0) p /= 10;
    if (p != 1) throw ValidationError("unit scale power of 10", std::to_string(c.unit.cents_per_unit));
  }
  Reader rd{c.unit};

  top.child("agents", [&](Section& a) { parse_agents(a, rd, c); });
  top.child("policies", [&](Section& p) {
    c.policies.srf = p.boolean("srf", false);
    c.policies.issuer_reserve_access = p.boolean("issuer_reserve_access", false);
    c.policies.eslr_reform = p.boolean("eslr_reform", false);
    c.policies.eslr_extra_headroom = rd.amount(p, "eslr_extra_headroom");
    c.policies.excess_collateral_as_capital = p.boolean("excess_collateral_as_capital", false);
    c.market.slr.base = checked_unit_fraction(p, "slr_base", c.market.slr.base);
    c.market.slr.gsib_surcharge = checked_unit_fraction(p, "gsib_surcharge", c.market.slr.gsib_surcharge);
  });
  top.child("market", [&](Section& m) {
    c.market.depth = rd.amount(m, "depth", c.unit.to_amount(1000));
    c.market.impact_coeff = m.fraction("impact_coeff", c.market.impact_coeff);
    c.market.max_dislocation = checked_unit_fraction(m, "max_dislocation", c.market.max_dislocation);
    c.market.long_impact_multiplier = m.fraction("long_impact_multiplier", c.market.long_impact_multiplier);
    c.market.flight_to_safety = m.boolean("flight_to_safety", false);
    c.market.flight_bid = checked_unit_fraction(m, "flight_bid", c.market.flight_bid);
    c.market.mark_reversion = checked_unit_fraction(m, "mark_reversion", c.market.mark_reversion);
    c.market.chain_length = static_cast<int>(m.integer("chain_length", 2));
    c.market.retention_frac = m.fraction("retention", c.market.retention_frac);
    c.market.replacement_frac = checked_unit_fraction(m, "replacement_frac", c.market.replacement_frac);
    c.repo_roll_rate = m.fraction("repo_roll_rate", c.repo_roll_rate);
  });
  if (!top.has("market")) c.market.depth = c.unit.to_amount(1000);
  c.market.srf_enabled = c.policies.srf;
  top.child("run_model", [&](Section& r) {
    c.run_model.baseline_rate = r.fraction("baseline_rate", c.run_model.baseline_rate);
    c.run_model.shifted_rate = r.fraction("shifted_rate", c.run_model.shifted_rate);
    c.run_model.deviation_threshold_bp = static_cast<int>(r.integer("deviation_threshold_bp", 300));
    c.run_model.delay_trigger_days = static_cast<int>(r.integer("delay_trigger_days", 2));
    c.run_model.recovery_days = static_cast<int>(r.integer("recovery_days", 5));
    const std::string form = r.string("form", "step");
    if (form == "step") {
      c.run_model.form = RegimeForm::Step;
    } else if (form == "smooth") {
      c.run_model.form = RegimeForm::Smooth;
    } else {
      throw ValidationError("run model form is step or smooth", r.at("form"));
    }
    c.run_model.smooth_width_bp = static_cast<int>(r.integer("smooth_width_bp", 100));
  });
  top.child("price", [&](Section& p) {
    c.price.unfilled_coeff = p.fraction("unfilled_coeff", c.price.unfilled_coeff);
    c.price.delay_coeff = Fraction::bp(p.integer("delay_coeff_bp", 10));
    c.price.reversion = checked_unit_fraction(p, "reversion", c.price.reversion);
    c.price.snap = Fraction::bp(p.integer("snap_bp", 1));
    c.price.floor = checked_unit_fraction(p, "floor", c.price.floor);
  });
  top.child("demand", [&](Section& d) {
    c.demand.mint_rate = checked_unit_fraction(d, "mint_rate", Fraction::zero());
    c.demand.noise = checked_unit_fraction(d, "noise", Fraction::zero());
  });
  top.each("shocks", [&](Section& s) {
    ShockSpec sp;
    sp.id = s.required_string("id");
    try {
      sp.cls = parse_shock_class(s.required_string("class"));
      sp.likelihood = parse_likelihood(s.string("likelihood", "Moderate"));
      sp.systemic = parse_systemic(s.string("systemic", "Medium"));
    } catch (const ShockError& e) {
      throw ValidationError(e.code() == ShockErrc::UnknownShockClass ? "unknown shock class" : "unknown shock band",
                            s.path() + ": " + e.what());
    }
    if (s.has("magnitude")) sp.magnitude = s.fraction("magnitude", {});
    if (s.has("price_effect")) sp.price_effect = checked_unit_fraction(s, "price_effect", {});
    sp.day = static_cast<int>(s.integer("day", 1));
    sp.duration = static_cast<int>(s.integer("duration", 1));
    sp.chain = s.string("chain", "");
    if (s.has("issuer")) sp.issuer = s.string("issuer", "");
    if (s.has("recipient")) sp.recipient = s.string("recipient", "");
    c.shocks.push_back(sp);
  });
  top.each("exogenous_sales", [&](Section& s) {
    ExogenousSale e;
    e.day = static_cast<int>(s.integer("day", 1));
    e.seller = s.required_string("seller");
    e.cls = parse_class(s.string("class", "long"), s.at("class"));
    e.amount = rd.required_amount(s, "amount");
    c.exogenous_sales.push_back(e);
  });
  top.each("chains", [&](Section& s) {
    ChainConfig ch;
    ch.id = s.required_string("id");
    ch.attack_cost = rd.amount(s, "attack_cost");
    c.chains.push_back(ch);
  });
  top.finish();

  validate(c);
  c.source_json = j.dump();
  return c;
}

}  // namespace detail

ScenarioConfig parse_config(std::string_view text) { return detail::config_from_json(detail::merged_json(text)); }

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace parsim
