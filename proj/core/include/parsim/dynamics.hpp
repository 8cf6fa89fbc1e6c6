#pragma once

// Redemption demand, the confidence regime, the coin's secondary price, and
// technical shocks that feed both.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "parsim/ledger.hpp"
#include "parsim/money.hpp"
#include "parsim/rng.hpp"
#include "parsim/settlement.hpp"

namespace parsim {

enum class Sensitivity : std::uint8_t { Insensitive, Sensitive };
enum class RegimeForm : std::uint8_t { Step, Smooth };

std::string_view to_string(Sensitivity s);

struct ConfidenceState {
  Fraction secondary_price = Fraction::one();
  int pending_delay_age = 0;
  std::optional<std::string> last_shock;

  Fraction deviation() const;
  std::int64_t deviation_bp() const { return deviation().to_bp(); }
};

struct RunModel {
  Fraction baseline_rate = Fraction::bp(10);
  Fraction shifted_rate = Fraction::pct_hundredths(500);
  int deviation_threshold_bp = 300;
  int delay_trigger_days = 2;
  int recovery_days = 5;
  RegimeForm form = RegimeForm::Step;
  /// Width of the ramp below the threshold for the smooth form.
  int smooth_width_bp = 100;

  Sensitivity state = Sensitivity::Insensitive;
  int calm_days = 0;

  /// Throws std::invalid_argument on inconsistent parameters.
  void validate() const;
  bool triggered(const ConfidenceState& conf) const;
  Fraction rate(const ConfidenceState& conf) const;
  /// Close-of-day regime update. Returns true when the state changed.
  bool end_of_day(const ConfidenceState& conf);
};

/// Today's requested redemptions. Flips the model to Sensitive when triggered.
Amount redemption_demand(RunModel& model, const ConfidenceState& conf, Amount coins);

struct PriceParams {
  /// Price decline per unit of unfilled redemptions relative to coins.
  Fraction unfilled_coeff = Fraction::one();
  /// Price decline per day of redemption delay.
  Fraction delay_coeff = Fraction::bp(10);
  /// Share of the gap to par closed per calm day.
  Fraction reversion = Fraction::pct_hundredths(5000);
  Fraction snap = Fraction::bp(1);
  Fraction floor = Fraction::pct_hundredths(100);
};

struct PriceInputs {
  Amount unfilled;
  Amount coins;
  Fraction shock_effect;
  AccessMode mode = AccessMode::Direct;
  /// Issuer intervention: target price and the filled share of the planned action.
  std::optional<Fraction> intervention_target;
  Fraction intervention_fill;
};

ConfidenceState update_secondary_price(const ConfidenceState& conf, const PriceInputs& in,
                                       const PriceParams& params = {});

enum class ShockClass : std::uint8_t { LivenessFault, UncontrolledSupply, ConfidenceOnly, CorrelatedLiveness };
enum class LikelihoodBand : std::uint8_t { Most, Moderate, Least };
enum class SystemicBand : std::uint8_t { High, Medium, Low };

enum class ShockErrc : std::uint8_t { UnknownShockClass, UnknownBand, NoTarget };

class ShockError : public std::runtime_error {
 public:
  ShockError(ShockErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ShockErrc code() const { return code_; }

 private:
  ShockErrc code_;
};

std::string_view to_string(ShockClass c);
std::string_view to_string(LikelihoodBand b);
std::string_view to_string(SystemicBand b);
ShockClass parse_shock_class(std::string_view s);
LikelihoodBand parse_likelihood(std::string_view s);
SystemicBand parse_systemic(std::string_view s);

struct ShockSpec {
  std::string id;
  ShockClass cls = ShockClass::ConfidenceOnly;
  LikelihoodBand likelihood = LikelihoodBand::Moderate;
  SystemicBand systemic = SystemicBand::Medium;
  /// UncontrolledSupply: minted coins as a multiple of coins outstanding.
  /// ConfidenceOnly: price dip. Sampled from the systemic band when empty.
  std::optional<Fraction> magnitude;
  /// UncontrolledSupply only: price dip while the excess supply is live.
  std::optional<Fraction> price_effect;
  int day = 1;
  int duration = 1;
  std::string chain;
  std::optional<std::string> issuer;
  std::optional<std::string> recipient;
};

/// Confidence dip range for attack-class shocks by systemic band.
std::pair<Fraction, Fraction> attack_band(SystemicBand b);
Fraction attack_magnitude(SystemicBand b, Rng& rng);

inline constexpr Fraction kDefaultSupplyMagnitude = Fraction::pct_hundredths(1000);
inline constexpr Fraction kDefaultSupplyPriceEffect = Fraction::bp(50);

struct ShockTarget {
  AgentId issuer;
  std::string name;
  std::vector<std::string> chains;
};

struct ShockEffect {
  std::string id;
  ShockClass cls = ShockClass::ConfidenceOnly;
  std::vector<AgentId> issuers;
  int start_day = 0;
  /// Last day (inclusive) the shock is live.
  int end_day = 0;
  Fraction price_effect;
  std::map<AgentId, Amount> minted;
  std::optional<AgentId> recipient;
  bool expired = false;

  bool active(int day) const { return day >= start_day && day <= end_day; }
  bool blocks(AgentId issuer, int day) const;
  bool hits(AgentId issuer) const;
};

/// Resolves targets and applies the shock's immediate ledger effects.
ShockEffect apply_shock(const ShockSpec& spec, LedgerWorld& world, const std::vector<ShockTarget>& targets,
                        std::optional<AgentId> recipient, Rng& rng);

/// Burns what is left of an uncontrolled mint. Idempotent.
void expire_shock(ShockEffect& effect, LedgerWorld& world);

/// Value at risk per day divided by the cost of attacking the chain.
Fraction attack_incentive_ratio(Amount value_at_risk_per_day, Amount attack_cost);

}  // namespace parsim
