#pragma once

// Seeded synthetic inputs so every study runs offline: a real-time price
// series with a duck-shaped daily profile, a thermal fleet and day-long
// demand/wind scenarios.

#include <cstdint>
#include <vector>

#include "socmkt/gridsim.hpp"
#include "socmkt/thermal.hpp"
#include "socmkt/valuation.hpp"

namespace socmkt {

struct PriceParams {
  std::size_t days = 365;
  double step_minutes = 5.0;
  double level = 1.0;          // scales the daily profile
  double noise_sd = 2.5;       // innovation of the intra-day AR(1) term ($/MWh)
  double noise_ar = 0.95;
  double daily_sd = 4.0;       // day-to-day level shift ($/MWh)
  double spikes_per_day = 1.2;
  double spike_mean = 120.0;   // mean height of an upward spike ($/MWh)
  double dip_share = 0.25;     // share of midday spikes that go negative
};

PriceSeries synthetic_prices(const PriceParams& params, std::uint64_t seed);

struct FleetParams {
  std::size_t units = 10;
  double total_capacity_mw = 18500.0;
  double cost_jitter = 0.10;  // relative spread of cost coefficients
};

std::vector<GeneratorSpec> synthetic_fleet(const FleetParams& params, std::uint64_t seed);

struct ScenarioParams {
  std::size_t count = 5;
  std::size_t hours = 24;
  double mean_demand_mw = 13000.0;
  double mean_wind_mw = 1500.0;
  double max_wind_mw = 4000.0;
};

std::vector<ScenarioData> synthetic_scenarios(const ScenarioParams& params, std::uint64_t seed);

}  // namespace socmkt
