#include "socmkt/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "socmkt/error.hpp"

namespace socmkt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kOnGrid = 1e-9;

struct RateArc {
  bool valid = false;
  double dest = 0.0;
  double p = 0.0;
  double d = 0.0;
  double cost = 0.0;
};

// Time-invariant move set out of every grid point.
struct ArcTable {
  std::vector<std::size_t> first;   // lowest reachable grid index
  std::vector<std::size_t> offset;  // start of this origin's arcs in the flat arrays
  std::vector<std::size_t> count;
  std::vector<double> p, d, cost;
  std::vector<RateArc> up, down;
};

ArcTable build_arcs(const StorageSpec& spec, const SocGrid& grid, bool rate_arcs) {
  ArcTable arcs;
  const std::size_t n = grid.count;
  arcs.first.resize(n);
  arcs.offset.resize(n);
  arcs.count.resize(n);
  arcs.up.resize(n);
  arcs.down.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const StorageState state = state_at(spec, grid.at(i));
    std::size_t lo = i;
    while (lo > 0 && dispatch_to_soc(spec, state, grid.at(lo - 1))) --lo;
    std::size_t hi = i;
    while (hi + 1 < n && dispatch_to_soc(spec, state, grid.at(hi + 1))) ++hi;
    arcs.first[i] = lo;
    arcs.offset[i] = arcs.p.size();
    arcs.count[i] = hi - lo + 1;
    for (std::size_t j = lo; j <= hi; ++j) {
      const auto move = dispatch_to_soc(spec, state, grid.at(j));
      arcs.p.push_back(move->p);
      arcs.d.push_back(move->d);
      arcs.cost.push_back(discharge_cost(spec, *move));
    }
    if (!rate_arcs || n < 2) continue;
    const Envelope env = feasible_envelope(spec, state);
    if (env.max_charge > 0.0) {
      const Dispatch move = plan_charge(spec, state, env.max_charge);
      const double dest = soc_total(spec, apply_dispatch(spec, state, move));
      if (dest > grid.at(hi) + kOnGrid) arcs.up[i] = RateArc{true, dest, move.p, 0.0, 0.0};
    }
    if (env.max_discharge > 0.0) {
      const Dispatch move = plan_discharge(spec, state, env.max_discharge);
      const double dest = soc_total(spec, apply_dispatch(spec, state, move));
      if (dest < grid.at(lo) - kOnGrid)
        arcs.down[i] = RateArc{true, dest, 0.0, move.d, discharge_cost(spec, move)};
    }
  }
  return arcs;
}

double interpolate(const SocGrid& grid, std::span<const double> v, double e) {
  if (grid.count < 2) return v[0];
  const double x = std::clamp((e - grid.e_min) / grid.spacing, 0.0, static_cast<double>(grid.count - 1));
  const auto i0 = std::min(static_cast<std::size_t>(x), grid.count - 2);
  const double f = x - static_cast<double>(i0);
  return (1.0 - f) * v[i0] + f * v[i0 + 1];
}

template <class Reward>
void backward_step(const ArcTable& arcs, const SocGrid& grid, std::size_t t, const Reward& reward,
                   std::span<const double> next, std::span<double> out) {
  for (std::size_t i = 0; i < grid.count; ++i) {
    const std::size_t base = arcs.offset[i];
    const std::size_t first = arcs.first[i];
    double best = kNegInf;
    for (std::size_t k = 0; k < arcs.count[i]; ++k) {
      const double v = reward(t, arcs.p[base + k], arcs.d[base + k], arcs.cost[base + k]) + next[first + k];
      best = v > best ? v : best;
    }
    if (const auto& a = arcs.up[i]; a.valid) {
      best = std::max(best, reward(t, a.p, a.d, a.cost) + interpolate(grid, next, a.dest));
    }
    if (const auto& a = arcs.down[i]; a.valid) {
      best = std::max(best, reward(t, a.p, a.d, a.cost) + interpolate(grid, next, a.dest));
    }
    out[i] = best;
  }
}

struct Candidate {
  double value = kNegInf;
  Dispatch move;
};

// Best single step from an arbitrary state given the value of the next state.
template <class Reward>
Candidate best_move(const StorageSpec& spec, const SocGrid& grid, const ArcTable& arcs,
                    const StorageState& state, std::size_t t, const Reward& reward,
                    std::span<const double> next, bool rate_arcs) {
  Candidate best;
  auto consider = [&](Dispatch move, double dest) {
    const double cost = discharge_cost(spec, move);
    const double r = reward(t, move.p, move.d, cost);
    if (r == kNegInf) return;
    const std::size_t j = grid.nearest(dest);
    const double v = std::abs(grid.at(j) - dest) <= kOnGrid ? next[j] : interpolate(grid, next, dest);
    if (r + v > best.value) {
      best.value = r + v;
      best.move = std::move(move);
    }
  };

  const double e = soc_total(spec, state);
  const std::size_t i = grid.nearest(e);
  const bool on_grid = std::abs(grid.at(i) - e) <= kOnGrid;
  if (on_grid) {
    // Rank the tabulated arcs exactly as the backward pass did, then realize the winner.
    const std::size_t base = arcs.offset[i];
    double top = kNegInf;
    std::size_t pick = arcs.count[i];
    for (std::size_t k = 0; k < arcs.count[i]; ++k) {
      const double v =
          reward(t, arcs.p[base + k], arcs.d[base + k], arcs.cost[base + k]) + next[arcs.first[i] + k];
      if (v > top) {
        top = v;
        pick = k;
      }
    }
    if (pick < arcs.count[i]) {
      if (auto move = dispatch_to_soc(spec, state, grid.at(arcs.first[i] + pick))) {
        best.value = top;
        best.move = std::move(*move);
      }
    }
  } else {
    consider(idle_dispatch(spec), e);
    const Envelope env = feasible_envelope(spec, state);
    const double lo = e - (env.max_discharge > 0.0 ? e - spec.e_min : 0.0);
    const double hi = e + (env.max_charge > 0.0 ? spec.e_max() - e : 0.0);
    const auto j_lo = static_cast<std::size_t>(std::max(0.0, std::ceil((lo - grid.e_min) / grid.spacing - 1e-9)));
    for (std::size_t j = j_lo; j < grid.count && grid.at(j) <= hi + kOnGrid; ++j) {
      auto move = dispatch_to_soc(spec, state, grid.at(j));
      if (!move) {
        if (grid.at(j) > e) break;
        continue;
      }
      consider(std::move(*move), grid.at(j));
    }
  }
  if (rate_arcs && grid.count >= 2) {
    const Envelope env = feasible_envelope(spec, state);
    if (env.max_charge > 0.0) {
      Dispatch move = plan_charge(spec, state, env.max_charge);
      const double dest = soc_total(spec, apply_dispatch(spec, state, move));
      consider(std::move(move), dest);
    }
    if (env.max_discharge > 0.0) {
      Dispatch move = plan_discharge(spec, state, env.max_discharge);
      const double dest = soc_total(spec, apply_dispatch(spec, state, move));
      consider(std::move(move), dest);
    }
  }
  if (best.value == kNegInf) {
    std::ostringstream os;
    os << "no admissible storage move at step " << t;
    throw Error(ErrorKind::infeasible, os.str());
  }
  return best;
}

template <class Reward>
Schedule solve(const StorageSpec& spec, const SocGrid& grid, std::size_t steps, double e_init,
               const Reward& reward, const DpOptions& options) {
  if (e_init < spec.e_min - kFillTolerance || e_init > spec.e_max() + kFillTolerance) {
    std::ostringstream os;
    os << "initial SoC " << e_init << " outside [" << spec.e_min << ", " << spec.e_max() << "]";
    throw Error(ErrorKind::invalid_argument, os.str());
  }
  const bool rate_arcs = options.rate_limit_arcs && grid.count >= 2;
  const ArcTable arcs = build_arcs(spec, grid, rate_arcs);
  const std::size_t n = grid.count;

  // Block length: the whole horizon when it fits, else about sqrt(T) with
  // checkpoints at block boundaries.
  std::size_t block = steps;
  if ((steps + 1) * n > options.max_table_values) {
    block = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(steps)))));
  }
  const bool single_block = block >= steps;

  // rows[t] holds V_t for the block being replayed; checkpoints hold V at block ends.
  std::vector<std::vector<double>> checkpoints((steps + block - 1) / std::max<std::size_t>(block, 1) + 1);
  std::vector<double> all_rows;
  if (single_block) all_rows.assign((steps + 1) * n, 0.0);

  std::vector<double> next(n, 0.0);
  std::vector<double> cur(n, 0.0);
  auto keep = [&](std::size_t t, const std::vector<double>& v) {
    if (single_block) {
      std::copy(v.begin(), v.end(), all_rows.begin() + static_cast<std::ptrdiff_t>(t * n));
    } else if (t % block == 0 || t == steps) {
      checkpoints[(t + block - 1) / block] = v;
    }
  };
  keep(steps, next);
  for (std::size_t t = steps; t >= 1; --t) {
    backward_step(arcs, grid, t - 1, reward, next, cur);
    keep(t - 1, cur);
    std::swap(next, cur);
  }

  Schedule schedule;
  StorageState state = state_at(spec, e_init);
  schedule.states.push_back(state);
  schedule.soc.push_back(soc_total(spec, state));
  std::vector<double> block_rows;
  for (std::size_t b0 = 0; b0 < steps; b0 += block) {
    const std::size_t b1 = std::min(b0 + block, steps);
    auto row = [&](std::size_t t) -> std::span<const double> {
      if (single_block) return {all_rows.data() + t * n, n};
      return {block_rows.data() + (t - b0 - 1) * n, n};
    };
    if (!single_block) {
      block_rows.assign((b1 - b0) * n, 0.0);
      const auto& end_values = checkpoints[(b1 + block - 1) / block];
      std::copy(end_values.begin(), end_values.end(), block_rows.begin() + static_cast<std::ptrdiff_t>((b1 - b0 - 1) * n));
      for (std::size_t t = b1; t >= b0 + 2; --t) {
        std::span<double> out{block_rows.data() + (t - b0 - 2) * n, n};
        backward_step(arcs, grid, t - 1, reward, row(t), out);
      }
    }
    for (std::size_t t = b0 + 1; t <= b1; ++t) {
      Candidate pick = best_move(spec, grid, arcs, state, t - 1, reward, row(t), rate_arcs);
      schedule.objective += reward(t - 1, pick.move.p, pick.move.d, discharge_cost(spec, pick.move));
      state = apply_dispatch(spec, state, pick.move);
      schedule.dispatch.push_back(std::move(pick.move));
      schedule.states.push_back(state);
      schedule.soc.push_back(soc_total(spec, state));
    }
  }
  return schedule;
}

StorageSpec at_step(const StorageSpec& spec, double step_minutes) {
  return spec.step_minutes == step_minutes ? spec : rescale_step(spec, step_minutes);
}

}  // namespace

Schedule optimize_storage(const StorageSpec& spec, const SocGrid& grid, std::size_t steps,
                          double e_init, const StageReward& reward, const DpOptions& options) {
  return solve(spec, grid, steps, e_init, reward, options);
}

Schedule multi_period_dispatch(const StorageSpec& spec, const PriceSeries& prices, double e_init,
                               const SocGrid& grid, const DpOptions& options) {
  validate_prices(prices);
  const StorageSpec step_spec = at_step(spec, prices.step_minutes);
  const double* lambda = prices.prices.data();
  auto reward = [lambda](std::size_t t, double p, double d, double cost) {
    return lambda[t] * (d - p) - cost;
  };
  return solve(step_spec, grid, prices.size(), e_init, reward, options);
}

Schedule brute_force_oracle(const StorageSpec& spec, const PriceSeries& prices, double e_init,
                            const SocGrid& grid) {
  if (prices.size() > 4 || grid.count > 21 || spec.size() > 2)
    throw Error(ErrorKind::invalid_argument,
                "brute force is limited to 4 steps, 21 grid points and 2 segments");
  validate_prices(prices);
  const StorageSpec step_spec = at_step(spec, prices.step_minutes);

  Schedule best;
  best.objective = kNegInf;
  Schedule path;
  path.states.push_back(state_at(step_spec, e_init));
  path.soc.push_back(soc_total(step_spec, path.states.back()));

  auto search = [&](auto&& self, std::size_t t) -> void {
    if (t == prices.size()) {
      if (path.objective > best.objective) best = path;
      return;
    }
    const StorageState here = path.states.back();
    std::vector<Dispatch> moves{idle_dispatch(step_spec)};
    for (std::size_t j = 0; j < grid.count; ++j) {
      if (auto move = dispatch_to_soc(step_spec, here, grid.at(j))) moves.push_back(std::move(*move));
    }
    for (const auto& move : moves) {
      const double gain = prices.prices[t] * (move.d - move.p) - discharge_cost(step_spec, move);
      const StorageState there = apply_dispatch(step_spec, here, move);
      path.dispatch.push_back(move);
      path.states.push_back(there);
      path.soc.push_back(soc_total(step_spec, there));
      path.objective += gain;
      self(self, t + 1);
      path.objective -= gain;
      path.dispatch.pop_back();
      path.states.pop_back();
      path.soc.pop_back();
    }
  };
  search(search, 0);
  return best;
}

double arbitrage_value(const StorageSpec& spec, const PriceSeries& prices, const Schedule& schedule) {
  const StorageSpec step_spec = at_step(spec, prices.step_minutes);
  double total = 0.0;
  for (std::size_t t = 0; t < schedule.dispatch.size(); ++t) {
    const auto& move = schedule.dispatch[t];
    total += prices.prices[t] * (move.d - move.p) - discharge_cost(step_spec, move);
  }
  return total;
}

}  // namespace socmkt
