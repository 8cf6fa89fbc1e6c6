#include "parsim/analytics.hpp"

#include <algorithm>
#include <vector>

namespace parsim {

std::string_view to_string(FdiciaBand b) {
  switch (b) {
    case FdiciaBand::Well: return "Well";
    case FdiciaBand::Adequate: return "Adequate";
    case FdiciaBand::Under: return "Under";
    case FdiciaBand::Significant: return "Significant";
    case FdiciaBand::Critical: return "Critical";
  }
  return "?";
}

FdiciaBand classify_fdicia(Fraction ratio) {
  if (ratio >= Fraction::pct_hundredths(500)) return FdiciaBand::Well;
  if (ratio >= Fraction::pct_hundredths(400)) return FdiciaBand::Adequate;
  if (ratio >= Fraction::pct_hundredths(300)) return FdiciaBand::Under;
  if (ratio >= Fraction::pct_hundredths(200)) return FdiciaBand::Significant;
  return FdiciaBand::Critical;
}

LeverageReport leverage_ratio(Amount assets, Amount coins_outstanding) {
  if (!assets.is_positive()) {
    throw AnalyticsError(AnalyticsErrc::NonPositiveAssets, "leverage ratio needs positive assets");
  }
  const __int128 capital = static_cast<__int128>(assets.cents()) - coins_outstanding.cents();
  const std::int64_t ten_thousandths = div_round_half_even(capital * 10'000, assets.cents());
  const Fraction ratio = Fraction::from_micros(ten_thousandths * 100);
  return {ratio, classify_fdicia(ratio)};
}

SlrReport slr(Amount capital, Amount assets, Amount exposures, bool gsib, const SlrParams& params) {
  const Amount denom = assets + exposures;
  if (!denom.is_positive()) {
    throw AnalyticsError(AnalyticsErrc::NonPositiveDenominator, "SLR needs positive assets plus exposures");
  }
  SlrReport r;
  r.lower_bound = params.bound(gsib);
  r.slr = ratio(capital, denom);
  if (r.lower_bound.micros() > 0 && capital.is_positive()) {
    r.headroom_assets = max(Amount::zero(), divide_floor(capital, r.lower_bound) - denom);
  }
  return r;
}

namespace {

struct Bucket {
  Amount value;
  std::int64_t days;
};

}  // namespace

LiquidityReport liquidity_metrics(const PortfolioState& portfolio, int today) {
  std::vector<Bucket> buckets;
  buckets.push_back({portfolio.d, 1});
  buckets.push_back({portfolio.income, 1});
  for (const auto& r : portfolio.repo) buckets.push_back({r.principal, std::max(1, r.second_leg_day - today)});
  if (portfolio.ladder.empty()) {
    buckets.push_back({portfolio.treasuries(), std::max(0, portfolio.t_maturity_day - today)});
  } else {
    for (const auto& b : portfolio.ladder) buckets.push_back({b.market_value(), std::max(0, b.maturity_day - today)});
  }

  Amount total;
  Amount daily;
  Amount weekly;
  __int128 weighted = 0;
  for (const auto& b : buckets) {
    if (!b.value.is_positive()) continue;
    total += b.value;
    if (b.days <= 1) daily += b.value;
    if (b.days <= 5) weekly += b.value;
    weighted += static_cast<__int128>(b.value.cents()) * b.days;
  }
  LiquidityReport r;
  if (!total.is_positive()) return r;
  r.dla_frac = ratio(daily, total);
  r.wla_frac = ratio(weekly, total);
  r.wam_days = Fraction::from_micros(div_round_half_even(weighted * Fraction::kScale, total.cents()));
  r.wal_days = r.wam_days;
  return r;
}

}  // namespace parsim
