#pragma once

// Solvency and liquidity metrics over balance-sheet inputs. Pure functions.

#include <cstdint>
#include <stdexcept>
#include <string_view>

#include "parsim/instruments.hpp"
#include "parsim/money.hpp"

namespace parsim {

enum class AnalyticsErrc : std::uint8_t { NonPositiveAssets, NonPositiveDenominator };

class AnalyticsError : public std::domain_error {
 public:
  AnalyticsError(AnalyticsErrc code, const std::string& what) : std::domain_error(what), code_(code) {}
  AnalyticsErrc code() const { return code_; }

 private:
  AnalyticsErrc code_;
};

/// Capitalization bands, best first. Each band includes its lower edge.
enum class FdiciaBand : std::uint8_t { Well, Adequate, Under, Significant, Critical };

std::string_view to_string(FdiciaBand b);

struct LeverageReport {
  Fraction ratio;  // rounded to 1e-4
  FdiciaBand band = FdiciaBand::Critical;
};

/// (assets - coins) / assets at 1e-4 precision, half to even.
LeverageReport leverage_ratio(Amount assets, Amount coins_outstanding);
FdiciaBand classify_fdicia(Fraction ratio);

struct SlrParams {
  Fraction base = Fraction::pct_hundredths(300);
  Fraction gsib_surcharge = Fraction::pct_hundredths(200);

  Fraction bound(bool gsib) const { return gsib ? base + gsib_surcharge : base; }
};

struct SlrReport {
  Fraction slr;
  Fraction lower_bound;
  Amount headroom_assets;
};

SlrReport slr(Amount capital, Amount assets, Amount exposures, bool gsib, const SlrParams& params = {});

struct LiquidityReport {
  Fraction dla_frac;
  Fraction wla_frac;
  Fraction wam_days;  // days, in millionths
  Fraction wal_days;
};

/// Deposits, accrued income and repo due within a day count as daily liquid.
LiquidityReport liquidity_metrics(const PortfolioState& portfolio, int today);

}  // namespace parsim
