#pragma once

// End-to-end studies: price-taker arbitrage backtests across market models
// and storage variants, and the price-influencer capacity/segment sweep.

#include <cstddef>
#include <string>
#include <vector>

#include "socmkt/benchmark.hpp"
#include "socmkt/bidding.hpp"
#include "socmkt/gridsim.hpp"
#include "socmkt/storage_model.hpp"
#include "socmkt/valuation.hpp"

namespace socmkt {

/// Five-segment nonlinear template (the NLA variant) with hourly ratings.
/// Values are plausible defaults, meant to be edited.
StorageSpec nonlinear_template();

/// Lin, NLA, NLB, NLC, NLF or NLL built from the five-segment template.
StorageSpec make_storage_variant(const std::string& name, const StorageSpec& base = nonlinear_template());

const std::vector<std::string>& variant_names();

/// "Multi" or "RTD-k".
struct MarketModel {
  bool multi = true;
  std::size_t segments = 0;

  std::string name() const;
  static MarketModel parse(const std::string& text);
};

struct PriceTakerConfig {
  double points_per_mwh = 1000.0;
  SamplingPlan sampling;
  BidAveraging averaging = BidAveraging::hour_mean;
  double value_step_minutes = 0.0;  // 0 runs the valuation at the price step
  double e_init = -1.0;             // below E_0 means start empty
  DpOptions dp;
};

struct ProfitReport {
  std::string model;
  double revenue = 0.0;  // sum of lambda * d
  double cost = 0.0;     // charging payments plus physical discharge cost
  double profit = 0.0;
  double ratio = 0.0;    // % of the Multi profit on the same inputs, 0 if unknown
  double seconds = 0.0;
};

struct BacktestRun {
  ProfitReport report;
  std::vector<Dispatch> dispatch;
  std::vector<double> soc;  // intervals + 1
  std::size_t projected = 0;  // intervals where the instruction had to be projected
};

/// Revenue, cost and profit recomputed from a dispatch list.
ProfitReport settle(const StorageSpec& spec, const PriceSeries& prices, const std::vector<Dispatch>& dispatch);

BacktestRun run_multi(const StorageSpec& spec, const PriceSeries& prices, const PriceTakerConfig& config);

/// Value, bid hourly on k equal SoC segments, clear every interval at the
/// given price and project onto the true storage model.
BacktestRun run_rtd(const StorageSpec& spec, const PriceSeries& prices, std::size_t k,
                    const PriceTakerConfig& config);

/// Hourly bids for a whole series, as run_rtd builds them.
std::vector<BidCurve> build_hourly_bids(const StorageSpec& spec, const PriceSeries& prices, std::size_t k,
                                        const PriceTakerConfig& config);

BacktestRun run_model(const StorageSpec& spec, const PriceSeries& prices, const MarketModel& model,
                      const PriceTakerConfig& config);

/// Runs each model; ratios are filled in when Multi is among them.
std::vector<BacktestRun> run_pricetaker_study(const StorageSpec& spec, const PriceSeries& prices,
                                              const std::vector<MarketModel>& models,
                                              const PriceTakerConfig& config);

/// Share of time spent in each of `bins` equal SoC bins over [E_0, E_S].
std::vector<double> soc_histogram(const std::vector<double>& soc, double e_min, double e_max, std::size_t bins);

struct SweepConfig {
  std::vector<double> capacity_shares = {0.0, 0.05, 0.10, 0.15, 0.20};  // of peak demand
  std::vector<std::size_t> segment_counts = {1, 2, 5, 10};
  double duration_h = 4.0;
  double efficiency = 0.9;
  double discharge_cost = 10.0;
  std::size_t grid_points = 401;
  SamplingPlan sampling;
  DpOptions dp;
};

struct SweepRow {
  double capacity_share = 0.0;
  double capacity_mw = 0.0;
  std::string model;          // "Multi" or "RTD-k"
  std::size_t segments = 0;   // 0 for Multi
  double mean_cost = 0.0;     // system cost per scenario-day ($)
  double normalized_cost = 0.0;
  double mean_price = 0.0;
  double price_std = 0.0;     // per-scenario std of hourly prices, averaged
  double storage_profit = 0.0;  // per scenario-day
};

struct ScenarioPrices {
  double capacity_share = 0.0;
  std::string model;
  std::string scenario;
  std::vector<double> prices;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<ScenarioPrices> prices;
};

/// Linear storage sized at `capacity_mw` with the sweep's duration, efficiency and cost.
StorageSpec influencer_storage(double capacity_mw, const SweepConfig& config);

SweepResult run_priceinfluencer_study(const std::vector<GeneratorSpec>& fleet,
                                      const std::vector<ScenarioData>& scenarios, const SweepConfig& config);

}  // namespace socmkt
