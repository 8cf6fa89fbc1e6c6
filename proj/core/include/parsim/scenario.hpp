#pragma once

// Scenario configuration, the daily engine, outputs and parameter sweeps.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "parsim/analytics.hpp"
#include "parsim/dynamics.hpp"
#include "parsim/instruments.hpp"
#include "parsim/ledger.hpp"
#include "parsim/market.hpp"
#include "parsim/settlement.hpp"

namespace parsim {

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line, std::string field)
      : std::runtime_error(what), line_(line), field_(std::move(field)) {}
  /// 1-based line of a syntax error; 0 for field errors.
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::string constraint, const std::string& detail = {})
      : std::runtime_error(detail.empty() ? constraint : constraint + ": " + detail), constraint_(std::move(constraint)) {}
  const std::string& constraint() const { return constraint_; }

 private:
  std::string constraint_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AuditFailure : public std::runtime_error {
 public:
  AuditFailure(int day, AuditReport report)
      : std::runtime_error("audit failed on day " + std::to_string(day) + "\n" + report.to_string()),
        day_(day),
        report_(std::move(report)) {}
  int day() const { return day_; }
  const AuditReport& report() const { return report_; }

 private:
  int day_;
  AuditReport report_;
};

/// Declared unit of every amount in config and output files.
struct UnitScale {
  std::int64_t cents_per_unit = 100;

  Amount to_amount(double units) const;
  std::string format(Amount a) const;
};

struct BankConfig {
  std::string name;
  Amount reserves;
  Amount capital;
};

struct DealerConfig {
  std::string name;
  Amount capital;
  Amount assets;
  Amount exposures;
  Amount reserves;
  bool gsib = true;
  std::optional<Amount> reserve_access;
  Amount bill_inventory;
  Amount long_inventory;
  bool market_maker = true;
};

struct BillBucket {
  Fraction share;
  int maturity_days = 30;
};

struct IssuerConfig {
  std::string name;
  std::string bank;
  Amount assets;
  Amount deposits;
  Amount bills;
  Amount long_dated;
  Amount repo;
  Amount other;
  std::string repo_counterparty;
  RepoTerms repo_terms;
  std::vector<BillBucket> bill_ladder;
  int long_maturity_days = 3650;
  AccessMode access = AccessMode::Direct;
  std::vector<std::string> eligible;
  std::vector<std::string> chains;
  bool genius_compliant = true;
  ParPolicy par_policy;
  Fraction mint_bill_share;
  Amount operating_cost;
  bool decline_negative_carry = true;
  Fraction treasury_yield = Fraction::from_micros(110);
};

enum class IntermediaryBehavior : std::uint8_t { Redeem, Warehouse };

struct IntermediaryConfig {
  std::string name;
  std::string bank;
  Amount deposits;
  IntermediaryBehavior behavior = IntermediaryBehavior::Redeem;
};

struct HolderConfig {
  std::string name;
  std::string bank;
  Amount deposits;
  std::vector<std::pair<std::string, Amount>> coins;
};

struct TreasuryBuyerConfig {
  std::string name;
  std::string bank;
  Amount deposits;
  Amount bills;
  Amount long_dated;
  bool cash_lender = true;
};

struct PolicyConfig {
  bool srf = false;
  bool issuer_reserve_access = false;
  bool eslr_reform = false;
  Amount eslr_extra_headroom;
  bool excess_collateral_as_capital = false;
};

struct DemandConfig {
  Fraction mint_rate;
  Fraction noise;
};

struct ExogenousSale {
  int day = 1;
  std::string seller;
  SecurityClass cls = SecurityClass::Long;
  Amount amount;
};

struct ChainConfig {
  std::string id;
  Amount attack_cost;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::uint64_t seed = 0;
  int horizon_days = 30;
  UnitScale unit;

  std::vector<BankConfig> banks;
  std::vector<DealerConfig> dealers;
  std::vector<IssuerConfig> issuers;
  std::vector<IntermediaryConfig> intermediaries;
  std::vector<HolderConfig> holders;
  std::vector<TreasuryBuyerConfig> treasury_buyers;

  PolicyConfig policies;
  MarketParams market;
  Fraction repo_roll_rate;
  RunModel run_model;
  PriceParams price;
  DemandConfig demand;
  std::vector<ShockSpec> shocks;
  std::vector<ExogenousSale> exogenous_sales;
  std::vector<ChainConfig> chains;

  /// Merged JSON the config was built from (preset applied), for sweeps.
  std::string source_json;
};

/// Reads, merges any preset, validates and cross-references a config file.
ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config(std::string_view text);

std::vector<std::string> preset_names();
/// Raw preset JSON; throws ValidationError for an unknown name.
std::string preset_json(std::string_view name);
std::string preset_description(std::string_view name);

struct IssuerDay {
  int day = 0;
  std::string issuer;
  Fraction price;
  std::int64_t deviation_bp = 0;
  Sensitivity regime = Sensitivity::Insensitive;
  Amount coins;
  Amount requested;
  Amount filled;
  Amount unfilled;
  Amount delayed_new;
  Amount delayed_outstanding;
  int delay_age = 0;
  std::size_t queue = 0;
  Amount capacity;
  Fraction leverage;
  std::string band;
  Amount equity;
  bool liveness_blocked = false;
  Amount intervention;
};

struct MarketDay {
  int day = 0;
  Fraction bill_price;
  Fraction long_price;
  ClearingReport clearing;
};

struct IssuerSummary {
  std::string name;
  std::int64_t peak_deviation_bp = 0;
  Fraction min_price = Fraction::one();
  int max_delay_days = 0;
  std::optional<int> insolvency_day;
  std::optional<int> regime_flip_day;
  std::optional<int> regime_recovery_day;
  Amount requested;
  Amount filled;
  Amount delayed_total;
  Amount delayed_sell_treasuries;
  Amount final_coins;
};

struct RunSummary {
  std::string name;
  std::uint64_t seed = 0;
  int days = 0;
  std::vector<IssuerSummary> issuers;
  Amount min_capacity;
  Amount max_capacity;
  Amount srf_draws;
  Amount seller_flow;
  VolumeDecomposition chain;
  Fraction min_bill_price = Fraction::one();
  Fraction max_bill_price = Fraction::one();
  Fraction min_long_price = Fraction::one();
  bool bill_non_decreasing = true;
  std::int64_t long_decline_bp = 0;
  std::vector<std::pair<std::string, Fraction>> attack_incentive;
  int audits_passed = 0;
  Amount delayed_total;
};

struct RunOutput {
  std::vector<IssuerDay> daily;
  std::vector<MarketDay> market;
  RunSummary summary;
  /// World state after the opening audit and after each day's close.
  std::vector<WorldSnapshot> closes;

  std::string daily_csv;
  std::string analytics_csv;
  std::string market_csv;
  std::string summary_json;
  std::string events_jsonl;
};

/// Executes the horizon in the fixed daily phase order. Throws AuditFailure.
RunOutput run(const ScenarioConfig& config);

/// Writes daily.csv, analytics.csv, market.csv, summary.json and events.jsonl.
void write_outputs(const RunOutput& out, const std::filesystem::path& dir);

struct SweepPoint {
  std::size_t index = 0;
  std::vector<std::pair<std::string, std::string>> values;
  std::string status = "ok";
  std::string message;
  std::optional<RunSummary> summary;
};

struct SweepReport {
  std::vector<std::string> keys;
  std::vector<SweepPoint> points;
  std::string matrix_csv;
};

/// Grid is a JSON object mapping JSON pointers into the config to value lists.
/// Points run in parallel; a failing point is recorded, not thrown.
SweepReport sweep(const ScenarioConfig& base, std::string_view grid_json, const std::filesystem::path& out_dir,
                  unsigned threads = 0);

}  // namespace parsim
