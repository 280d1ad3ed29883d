#pragma once

// Thermal system for the price-influencer study: priority-list unit
// commitment with min up/down repair, multi-period economic dispatch with
// storage, and hour-by-hour real-time clearing of storage bids.

#include <cstddef>
#include <string>
#include <vector>

#include "socmkt/benchmark.hpp"
#include "socmkt/bidding.hpp"
#include "socmkt/clearing.hpp"
#include "socmkt/storage_model.hpp"
#include "socmkt/thermal.hpp"
#include "socmkt/valuation.hpp"

namespace socmkt {

struct ScenarioData {
  std::string id;
  std::vector<double> demand;  // MW per hour
  std::vector<double> wind;    // forecast MW per hour

  std::size_t hours() const noexcept { return demand.size(); }
};

void validate_scenario(const ScenarioData& scenario);

struct ReserveRule {
  double wind_share = 0.05;
  double demand_share = 0.03;
};

/// Required upward reserve (MW) for one hour.
double required_reserve(double demand, double wind, const ReserveRule& rule = {});

/// u[i][t] is 1 when unit i is online in hour t. Units start the day offline.
using Commitment = std::vector<std::vector<int>>;

struct CommitmentSchedule {
  Commitment u;
  Commitment y;  // startups
  Commitment z;  // shutdowns
  std::vector<std::vector<double>> output;  // [t][i] MW, zero when offline
  std::vector<double> wind;                 // accommodated wind per hour
  std::vector<double> price_da;             // $/MWh
  double energy_cost = 0.0;
  double fixed_cost = 0.0;  // no-load plus startup

  double total_cost() const noexcept { return energy_cost + fixed_cost; }
};

/// True when every on-run (except one cut by the horizon end) lasts at least
/// t_up hours and every off-run between two on-runs lasts at least t_dn hours.
bool min_up_down_ok(const std::vector<int>& u, int t_up, int t_dn);

enum class RepairMode {
  extend_on,   // lengthen short on-runs, fill short gaps
  extend_off,  // drop short on-runs, lengthen short gaps
};

/// Single-unit min up/down repair. Each mode only ever switches hours one way.
std::vector<int> repair_min_up_down(std::vector<int> u, int t_up, int t_dn, RepairMode mode);

/// Online units for hour t.
std::vector<GeneratorSpec> online_units(const std::vector<GeneratorSpec>& fleet, const Commitment& u,
                                        std::size_t t);

/// Energy, no-load and startup cost of a commitment; +infinity if some hour
/// misses the capacity or minimum-generation requirement.
double commitment_cost(const std::vector<GeneratorSpec>& fleet, const ScenarioData& scenario,
                       const Commitment& u, const ReserveRule& rule = {});

/// Priority-list heuristic. Throws Error(infeasible) naming the first hour it
/// cannot serve.
CommitmentSchedule unit_commitment(const std::vector<GeneratorSpec>& fleet, const ScenarioData& scenario,
                                   const ReserveRule& rule = {});

/// Fills startups, shutdowns, dispatch and prices for a given on/off matrix.
CommitmentSchedule evaluate_commitment(const std::vector<GeneratorSpec>& fleet,
                                       const ScenarioData& scenario, Commitment u);

/// Every violated commitment constraint as a readable line; empty when valid.
std::vector<std::string> check_commitment(const std::vector<GeneratorSpec>& fleet,
                                          const ScenarioData& scenario,
                                          const CommitmentSchedule& schedule,
                                          const ReserveRule& rule = {});

struct SystemHour {
  double load = 0.0;     // thermal plus wind served (MW)
  double storage = 0.0;  // storage net output d - p (MW)
  ThermalDispatch thermal;
};

struct SystemDay {
  std::vector<SystemHour> hours;
  std::vector<Dispatch> storage;        // realized, physical model
  std::vector<StorageState> states;     // hours + 1
  std::vector<double> prices;           // $/MWh
  double energy_cost = 0.0;             // thermal energy cost
  double storage_cost = 0.0;            // sum C_s d_s
  double system_cost = 0.0;             // energy + storage + commitment fixed cost
  double storage_profit = 0.0;          // sum price (d - p) - sum C_s d_s
};

/// Multi-period benchmark: storage trajectory chosen by DP against the
/// committed thermal fleet. Storage ratings must be hourly.
SystemDay economic_dispatch_multi(const std::vector<GeneratorSpec>& fleet,
                                  const CommitmentSchedule& commitment, const ScenarioData& scenario,
                                  const StorageSpec& spec, double e_init, const SocGrid& grid,
                                  const DpOptions& options = {});

/// Sequential single-period clearing, one call per hour, with the SoC carried
/// between hours. `market` is the bid segmentation; the cleared instruction is
/// projected onto the physical spec before it is applied.
SystemDay simulate_realtime_day(const std::vector<GeneratorSpec>& fleet,
                                const CommitmentSchedule& commitment, const ScenarioData& scenario,
                                const StorageSpec& physical, const StorageSpec& market,
                                const std::vector<BidCurve>& bids, double e_init);

}  // namespace socmkt
