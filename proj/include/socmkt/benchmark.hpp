#pragma once

// Multi-period optimal storage dispatch by dynamic programming over a
// discretized total SoC. Each arc is a feasible one-step Dispatch built by the
// storage model (top-down drain, bottom-up fill), so the segment logic and the
// shared rating budget hold on every step of the returned schedule.

#include <cstddef>
#include <functional>
#include <vector>

#include "socmkt/storage_model.hpp"
#include "socmkt/valuation.hpp"

namespace socmkt {

struct Schedule {
  std::vector<Dispatch> dispatch;     // one per step
  std::vector<StorageState> states;   // steps + 1, states[0] is the initial state
  std::vector<double> soc;            // steps + 1
  double objective = 0.0;
};

struct DpOptions {
  // Besides moves to grid points, also consider the full-rate charge and
  // discharge moves, valued by linear interpolation between grid points. The
  // realized schedule then leaves the grid, but the full rating is usable.
  bool rate_limit_arcs = true;
  // Rows of the value table kept at once are bounded by this many doubles;
  // beyond it the backward pass is recomputed block by block.
  std::size_t max_table_values = 32u << 20;
};

/// Reward of one step: t is the 0-based step, p/d the total charge/discharge
/// and cost the physical discharge cost. Return -infinity for a forbidden move.
using StageReward = std::function<double(std::size_t t, double p, double d, double cost)>;

Schedule optimize_storage(const StorageSpec& spec, const SocGrid& grid, std::size_t steps,
                          double e_init, const StageReward& reward, const DpOptions& options = {});

/// Arbitrage benchmark: maximizes sum_t lambda_t (d_t - p_t) - sum_s C_s d_{t,s}.
/// Ratings are rescaled to the price step if needed.
Schedule multi_period_dispatch(const StorageSpec& spec, const PriceSeries& prices, double e_init,
                               const SocGrid& grid, const DpOptions& options = {});

/// Exhaustive search over every sequence of moves to grid points. Only for
/// tiny instances: at most 4 steps, 21 grid points and 2 segments.
Schedule brute_force_oracle(const StorageSpec& spec, const PriceSeries& prices, double e_init,
                            const SocGrid& grid);

/// Realized arbitrage value of a schedule, recomputed from its dispatches.
double arbitrage_value(const StorageSpec& spec, const PriceSeries& prices, const Schedule& schedule);

}  // namespace socmkt
