#include "socmkt/gridsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "socmkt/error.hpp"

namespace socmkt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBalanceTolerance = 1e-6;

struct Run {
  std::size_t begin;
  std::size_t end;  // exclusive
  int value;
};

std::vector<Run> runs_of(const std::vector<int>& u) {
  std::vector<Run> runs;
  for (std::size_t t = 0; t < u.size();) {
    std::size_t e = t;
    while (e < u.size() && u[e] == u[t]) ++e;
    runs.push_back({t, e, u[t]});
    t = e;
  }
  return runs;
}

// Priority order: cheapest full-load average cost first, input order on ties.
std::vector<std::size_t> priority_order(const std::vector<GeneratorSpec>& fleet) {
  std::vector<std::size_t> order(fleet.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return fleet[a].full_load_average_cost() < fleet[b].full_load_average_cost();
  });
  return order;
}

struct HourTotals {
  double g_min = 0.0;
  double g_max = 0.0;
};

HourTotals totals(const std::vector<GeneratorSpec>& fleet, const Commitment& u, std::size_t t) {
  HourTotals h;
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    if (!u[i][t]) continue;
    h.g_min += fleet[i].g_min;
    h.g_max += fleet[i].g_max;
  }
  return h;
}

bool hour_ok(const std::vector<GeneratorSpec>& fleet, const ScenarioData& sc, const Commitment& u,
             std::size_t t, const ReserveRule& rule) {
  const HourTotals h = totals(fleet, u, t);
  const double need = sc.demand[t] + required_reserve(sc.demand[t], sc.wind[t], rule);
  return h.g_max >= need - kBalanceTolerance && h.g_min <= sc.demand[t] + kBalanceTolerance;
}

bool all_hours_ok(const std::vector<GeneratorSpec>& fleet, const ScenarioData& sc, const Commitment& u,
                  const ReserveRule& rule) {
  for (std::size_t t = 0; t < sc.hours(); ++t)
    if (!hour_ok(fleet, sc, u, t, rule)) return false;
  return true;
}

bool all_units_ok(const std::vector<GeneratorSpec>& fleet, const Commitment& u) {
  for (std::size_t i = 0; i < fleet.size(); ++i)
    if (!min_up_down_ok(u[i], fleet[i].t_up, fleet[i].t_dn)) return false;
  return true;
}

// Adds the cheapest offline units to hours short of capacity, skipping any
// unit whose minimum output would overshoot demand.
bool fill_capacity(const std::vector<GeneratorSpec>& fleet, const ScenarioData& sc, Commitment& u,
                   const std::vector<std::size_t>& order, const ReserveRule& rule) {
  bool changed = false;
  for (std::size_t t = 0; t < sc.hours(); ++t) {
    const double need = sc.demand[t] + required_reserve(sc.demand[t], sc.wind[t], rule);
    HourTotals h = totals(fleet, u, t);
    for (std::size_t i : order) {
      if (h.g_max >= need) break;
      if (u[i][t]) continue;
      if (h.g_min + fleet[i].g_min > sc.demand[t]) continue;
      u[i][t] = 1;
      h.g_min += fleet[i].g_min;
      h.g_max += fleet[i].g_max;
      changed = true;
    }
  }
  return changed;
}

std::string hour_diagnostic(const std::vector<GeneratorSpec>& fleet, const ScenarioData& sc,
                            const Commitment& u, const ReserveRule& rule) {
  for (std::size_t t = 0; t < sc.hours(); ++t) {
    if (hour_ok(fleet, sc, u, t, rule)) continue;
    const HourTotals h = totals(fleet, u, t);
    std::ostringstream os;
    os << "hour " << t << ": committed capacity " << h.g_max << " MW and minimum output " << h.g_min
       << " MW cannot serve demand " << sc.demand[t] << " MW plus reserve "
       << required_reserve(sc.demand[t], sc.wind[t], rule) << " MW";
    return os.str();
  }
  return {};
}

}  // namespace

void validate_scenario(const ScenarioData& sc) {
  if (sc.demand.empty()) throw Error(ErrorKind::invalid_argument, "scenario " + sc.id + " has no hours");
  if (sc.demand.size() != sc.wind.size())
    throw Error(ErrorKind::invalid_argument, "scenario " + sc.id + ": demand and wind lengths differ");
  for (std::size_t t = 0; t < sc.hours(); ++t) {
    if (!(sc.demand[t] >= 0.0) || !(sc.wind[t] >= 0.0) || !std::isfinite(sc.demand[t]) ||
        !std::isfinite(sc.wind[t])) {
      std::ostringstream os;
      os << "scenario " << sc.id << ", hour " << t << ": demand and wind must be finite and non-negative";
      throw Error(ErrorKind::invalid_argument, os.str());
    }
  }
}

double required_reserve(double demand, double wind, const ReserveRule& rule) {
  return rule.wind_share * wind + rule.demand_share * demand;
}

bool min_up_down_ok(const std::vector<int>& u, int t_up, int t_dn) {
  for (const Run& r : runs_of(u)) {
    const auto len = static_cast<int>(r.end - r.begin);
    if (r.end == u.size()) continue;  // cut by the horizon
    if (r.value && len < t_up) return false;
    if (!r.value && r.begin > 0 && len < t_dn) return false;
  }
  return true;
}

std::vector<int> repair_min_up_down(std::vector<int> u, int t_up, int t_dn, RepairMode mode) {
  const std::size_t n = u.size();
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Run& r : runs_of(u)) {
      if (r.end == n) continue;
      const auto len = static_cast<int>(r.end - r.begin);
      if (r.value && len < t_up) {
        if (mode == RepairMode::extend_on) {
          const std::size_t stop = std::min(n, r.begin + static_cast<std::size_t>(t_up));
          std::fill(u.begin() + static_cast<std::ptrdiff_t>(r.end), u.begin() + static_cast<std::ptrdiff_t>(stop), 1);
        } else {
          std::fill(u.begin() + static_cast<std::ptrdiff_t>(r.begin), u.begin() + static_cast<std::ptrdiff_t>(r.end), 0);
        }
        changed = true;
        break;
      }
      if (!r.value && r.begin > 0 && len < t_dn) {
        if (mode == RepairMode::extend_on) {
          std::fill(u.begin() + static_cast<std::ptrdiff_t>(r.begin), u.begin() + static_cast<std::ptrdiff_t>(r.end), 1);
        } else {
          const std::size_t stop = std::min(n, r.begin + static_cast<std::size_t>(t_dn));
          std::fill(u.begin() + static_cast<std::ptrdiff_t>(r.end), u.begin() + static_cast<std::ptrdiff_t>(stop), 0);
        }
        changed = true;
        break;
      }
    }
  }
  return u;
}

std::vector<GeneratorSpec> online_units(const std::vector<GeneratorSpec>& fleet, const Commitment& u,
                                        std::size_t t) {
  std::vector<GeneratorSpec> out;
  for (std::size_t i = 0; i < fleet.size(); ++i)
    if (u[i][t]) out.push_back(fleet[i]);
  return out;
}

double commitment_cost(const std::vector<GeneratorSpec>& fleet, const ScenarioData& sc,
                       const Commitment& u, const ReserveRule& rule) {
  if (!all_hours_ok(fleet, sc, u, rule)) return kInf;
  double cost = 0.0;
  for (std::size_t t = 0; t < sc.hours(); ++t) {
    const auto online = online_units(fleet, u, t);
    cost += thermal_dispatch(online, sc.demand[t], sc.wind[t]).cost;
  }
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    int prev = 0;
    for (std::size_t t = 0; t < sc.hours(); ++t) {
      if (u[i][t]) cost += fleet[i].c_noload;
      if (u[i][t] && !prev) cost += fleet[i].c_start;
      prev = u[i][t];
    }
  }
  return cost;
}

CommitmentSchedule evaluate_commitment(const std::vector<GeneratorSpec>& fleet, const ScenarioData& sc,
                                       Commitment u) {
  const std::size_t hours = sc.hours();
  CommitmentSchedule out;
  out.y.assign(fleet.size(), std::vector<int>(hours, 0));
  out.z.assign(fleet.size(), std::vector<int>(hours, 0));
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    int prev = 0;
    for (std::size_t t = 0; t < hours; ++t) {
      out.y[i][t] = u[i][t] && !prev;
      out.z[i][t] = !u[i][t] && prev;
      if (u[i][t]) out.fixed_cost += fleet[i].c_noload;
      if (out.y[i][t]) out.fixed_cost += fleet[i].c_start;
      prev = u[i][t];
    }
  }
  for (std::size_t t = 0; t < hours; ++t) {
    const auto online = online_units(fleet, u, t);
    const ThermalDispatch td = thermal_dispatch(online, sc.demand[t], sc.wind[t]);
    std::vector<double> g(fleet.size(), 0.0);
    for (std::size_t i = 0, k = 0; i < fleet.size(); ++i)
      if (u[i][t]) g[i] = td.output[k++];
    out.output.push_back(std::move(g));
    out.wind.push_back(td.wind);
    out.price_da.push_back(td.price);
    out.energy_cost += td.cost;
  }
  out.u = std::move(u);
  return out;
}

CommitmentSchedule unit_commitment(const std::vector<GeneratorSpec>& fleet, const ScenarioData& sc,
                                   const ReserveRule& rule) {
  validate_scenario(sc);
  if (fleet.empty()) throw Error(ErrorKind::invalid_argument, "empty generator fleet");
  for (const auto& g : fleet) validate_generator(g);
  const std::size_t hours = sc.hours();
  const auto order = priority_order(fleet);

  Commitment u(fleet.size(), std::vector<int>(hours, 0));
  fill_capacity(fleet, sc, u, order, rule);

  // Repair min up/down. Early rounds pick the cheaper feasible direction per
  // unit; later rounds only extend on-runs so the loop terminates.
  constexpr int kFreeRounds = 8;
  constexpr int kMaxRounds = 64;
  for (int round = 0; round < kMaxRounds; ++round) {
    bool changed = false;
    for (std::size_t i : order) {
      const auto& gen = fleet[i];
      if (min_up_down_ok(u[i], gen.t_up, gen.t_dn)) continue;
      Commitment on = u;
      on[i] = repair_min_up_down(u[i], gen.t_up, gen.t_dn, RepairMode::extend_on);
      if (round < kFreeRounds) {
        Commitment off = u;
        off[i] = repair_min_up_down(u[i], gen.t_up, gen.t_dn, RepairMode::extend_off);
        const double c_on = commitment_cost(fleet, sc, on, rule);
        const double c_off = commitment_cost(fleet, sc, off, rule);
        u = (c_off < c_on || (c_off == c_on && c_on == kInf)) ? std::move(off) : std::move(on);
      } else {
        u = std::move(on);
      }
      changed = true;
    }
    if (fill_capacity(fleet, sc, u, order, rule)) changed = true;
    if (!changed) break;
  }
  if (!all_hours_ok(fleet, sc, u, rule))
    throw Error(ErrorKind::infeasible, "unit commitment failed, " + hour_diagnostic(fleet, sc, u, rule));
  if (!all_units_ok(fleet, u))
    throw Error(ErrorKind::infeasible, "unit commitment could not satisfy minimum up/down times");

  // Decommitment: most expensive units first, drop or trim on-runs while the
  // schedule stays feasible and gets cheaper.
  double best = commitment_cost(fleet, sc, u, rule);
  for (int pass = 0; pass < 3; ++pass) {
    bool improved = false;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const std::size_t i = *it;
      const auto& gen = fleet[i];
      auto attempt = [&](const std::vector<int>& candidate) {
        if (!min_up_down_ok(candidate, gen.t_up, gen.t_dn)) return false;
        Commitment trial = u;
        trial[i] = candidate;
        const double c = commitment_cost(fleet, sc, trial, rule);
        if (c < best - 1e-9) {
          best = c;
          u = std::move(trial);
          return true;
        }
        return false;
      };
      bool retry = true;
      while (retry) {
        retry = false;
        for (const Run& r : runs_of(u[i])) {
          if (!r.value) continue;
          std::vector<int> cand = u[i];
          std::fill(cand.begin() + static_cast<std::ptrdiff_t>(r.begin), cand.begin() + static_cast<std::ptrdiff_t>(r.end), 0);
          if (attempt(cand)) {
            retry = improved = true;
            break;
          }
          cand = u[i];
          cand[r.begin] = 0;
          if (r.end - r.begin > 1 && attempt(cand)) {
            retry = improved = true;
            break;
          }
          cand = u[i];
          cand[r.end - 1] = 0;
          if (r.end - r.begin > 1 && attempt(cand)) {
            retry = improved = true;
            break;
          }
        }
      }
    }
    if (!improved) break;
  }
  return evaluate_commitment(fleet, sc, std::move(u));
}

std::vector<std::string> check_commitment(const std::vector<GeneratorSpec>& fleet, const ScenarioData& sc,
                                          const CommitmentSchedule& s, const ReserveRule& rule) {
  std::vector<std::string> out;
  auto report = [&](std::size_t i, std::size_t t, const std::string& what) {
    std::ostringstream os;
    os << "unit " << (i < fleet.size() ? fleet[i].id : std::string("-")) << ", hour " << t << ": " << what;
    out.push_back(os.str());
  };
  const std::size_t hours = sc.hours();
  if (s.u.size() != fleet.size() || s.y.size() != fleet.size() || s.z.size() != fleet.size() ||
      s.output.size() != hours || s.wind.size() != hours || s.price_da.size() != hours) {
    out.push_back("schedule dimensions do not match fleet and scenario");
    return out;
  }
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    const auto& g = fleet[i];
    int prev = 0;
    for (std::size_t t = 0; t < hours; ++t) {
      const int u = s.u[i][t];
      const int y = s.y[i][t];
      const int z = s.z[i][t];
      if (y - z != u - prev) report(i, t, "startup/shutdown do not match status change");
      if (y + z > 1) report(i, t, "simultaneous startup and shutdown");
      const double out_mw = s.output[t][i];
      if (u && (out_mw < g.g_min - kBalanceTolerance || out_mw > g.g_max + kBalanceTolerance))
        report(i, t, "output outside [g_min, g_max]");
      if (!u && std::abs(out_mw) > kBalanceTolerance) report(i, t, "output while offline");
      prev = u;
    }
    if (!min_up_down_ok(s.u[i], g.t_up, g.t_dn)) report(i, 0, "minimum up/down time violated");
  }
  for (std::size_t t = 0; t < hours; ++t) {
    double gen = 0.0;
    double headroom = 0.0;
    for (std::size_t i = 0; i < fleet.size(); ++i) {
      gen += s.output[t][i];
      if (s.u[i][t]) headroom += fleet[i].g_max - s.output[t][i];
    }
    if (std::abs(gen + s.wind[t] - sc.demand[t]) > kBalanceTolerance) report(fleet.size(), t, "power balance");
    if (s.wind[t] < -kBalanceTolerance || s.wind[t] > sc.wind[t] + kBalanceTolerance)
      report(fleet.size(), t, "wind outside [0, forecast]");
    if (headroom < required_reserve(sc.demand[t], sc.wind[t], rule) - kBalanceTolerance)
      report(fleet.size(), t, "reserve short");
  }
  return out;
}

namespace {

StorageSpec hourly(const StorageSpec& spec) {
  return spec.step_minutes == 60.0 ? spec : rescale_step(spec, 60.0);
}

void settle(SystemDay& day, const StorageSpec& spec, double fixed_cost) {
  day.storage_cost = 0.0;
  day.storage_profit = 0.0;
  day.energy_cost = 0.0;
  for (std::size_t t = 0; t < day.storage.size(); ++t) {
    const double c = discharge_cost(spec, day.storage[t]);
    day.storage_cost += c;
    day.storage_profit += day.prices[t] * day.storage[t].net_output() - c;
    day.energy_cost += day.hours[t].thermal.cost;
  }
  day.system_cost = day.energy_cost + day.storage_cost + fixed_cost;
}

}  // namespace

SystemDay economic_dispatch_multi(const std::vector<GeneratorSpec>& fleet,
                                  const CommitmentSchedule& commitment, const ScenarioData& sc,
                                  const StorageSpec& spec_in, double e_init, const SocGrid& grid,
                                  const DpOptions& options) {
  validate_scenario(sc);
  const StorageSpec spec = hourly(spec_in);
  const std::size_t hours = sc.hours();
  std::vector<std::vector<GeneratorSpec>> online(hours);
  std::vector<HourTotals> range(hours);
  for (std::size_t t = 0; t < hours; ++t) {
    online[t] = online_units(fleet, commitment.u, t);
    for (const auto& g : online[t]) {
      range[t].g_min += g.g_min;
      range[t].g_max += g.g_max;
    }
    range[t].g_max += sc.wind[t];
  }

  std::vector<std::unordered_map<double, double>> memo(hours);
  auto reward = [&](std::size_t t, double p, double d, double cost) {
    const double load = sc.demand[t] + p - d;
    const double tol = 1e-9 * std::max(1.0, std::abs(load));
    if (load < range[t].g_min - tol || load > range[t].g_max + tol) return -kInf;
    auto [it, fresh] = memo[t].try_emplace(d - p, 0.0);
    if (fresh) it->second = thermal_dispatch(online[t], load, sc.wind[t]).cost;
    return -(it->second + cost);
  };
  const Schedule schedule = optimize_storage(spec, grid, hours, e_init, reward, options);

  SystemDay day;
  day.storage = schedule.dispatch;
  day.states = schedule.states;
  for (std::size_t t = 0; t < hours; ++t) {
    const Dispatch& move = day.storage[t];
    SystemHour h;
    h.storage = move.net_output();
    h.thermal = thermal_dispatch(online[t], sc.demand[t] - h.storage, sc.wind[t]);
    h.load = sc.demand[t] - h.storage;
    day.prices.push_back(h.thermal.price);
    day.hours.push_back(std::move(h));
  }
  settle(day, spec, commitment.fixed_cost);
  return day;
}

SystemDay simulate_realtime_day(const std::vector<GeneratorSpec>& fleet,
                                const CommitmentSchedule& commitment, const ScenarioData& sc,
                                const StorageSpec& physical_in, const StorageSpec& market_in,
                                const std::vector<BidCurve>& bids, double e_init) {
  validate_scenario(sc);
  const StorageSpec physical = hourly(physical_in);
  const StorageSpec market = hourly(market_in);
  const std::size_t hours = sc.hours();
  if (bids.size() < hours) {
    std::ostringstream os;
    os << "need bids for " << hours << " hours, got " << bids.size();
    throw Error(ErrorKind::invalid_argument, os.str());
  }

  SystemDay day;
  StorageState state = state_at(physical, e_init);
  day.states.push_back(state);
  for (std::size_t t = 0; t < hours; ++t) {
    const auto online = online_units(fleet, commitment.u, t);
    const StorageState market_state = state_at(market, soc_total(physical, state));
    InfluencerClearing cleared =
        clear_priceinfluencer(online, sc.demand[t], sc.wind[t], market, market_state, bids[t]);
    const Dispatch& instr = cleared.storage.dispatch;
    Dispatch move = project_dispatch(physical, state, instr.p, instr.d);

    SystemHour h;
    h.storage = move.net_output();
    h.load = sc.demand[t] - h.storage;
    double price = cleared.storage.price;
    if (std::abs(move.p - instr.p) > 1e-12 || std::abs(move.d - instr.d) > 1e-12) {
      h.thermal = thermal_dispatch(online, h.load, sc.wind[t]);
      price = h.thermal.price;
    } else {
      h.thermal = std::move(cleared.thermal);
    }
    state = apply_dispatch(physical, state, move);
    day.prices.push_back(price);
    day.hours.push_back(std::move(h));
    day.storage.push_back(std::move(move));
    day.states.push_back(state);
  }
  settle(day, physical, commitment.fixed_cost);
  return day;
}

}  // namespace socmkt
