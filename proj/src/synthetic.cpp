#include "socmkt/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "socmkt/error.hpp"

namespace socmkt {

namespace {

// $/MWh at the top of each hour; morning and evening ramps around a solar trough.
constexpr std::array<double, 24> kPriceShape = {28, 26, 25, 25, 26, 30, 38, 42, 36, 26, 18, 12,
                                                10, 10, 12, 18, 28, 42, 58, 62, 52, 42, 36, 31};

// Demand relative to the daily mean.
constexpr std::array<double, 24> kDemandShape = {0.76, 0.72, 0.70, 0.69, 0.70, 0.75, 0.84, 0.95,
                                                 1.01, 1.05, 1.08, 1.09, 1.10, 1.10, 1.10, 1.12,
                                                 1.16, 1.22, 1.26, 1.23, 1.16, 1.05, 0.94, 0.83};

double shape_at(double hour) {
  const auto h0 = static_cast<std::size_t>(std::floor(hour)) % 24;
  const double f = hour - std::floor(hour);
  return (1.0 - f) * kPriceShape[h0] + f * kPriceShape[(h0 + 1) % 24];
}

struct UnitTemplate {
  const char* kind;
  double c_lin;
  double c_quad;   // at the template size
  double c_noload;
  double c_start;
  double g_min;
  double g_max;
  int t_up;
  int t_dn;
};

// Baseload, coal, combined cycle and peakers; sizes in MW before scaling.
constexpr std::array<UnitTemplate, 10> kUnits = {{
    {"nuc", 7.0, 0.0003, 400.0, 50000.0, 1600.0, 2200.0, 24, 24},
    {"coal", 18.0, 0.0040, 600.0, 20000.0, 500.0, 1500.0, 8, 8},
    {"coal", 20.0, 0.0040, 600.0, 20000.0, 500.0, 1500.0, 8, 8},
    {"coal", 23.0, 0.0050, 500.0, 15000.0, 400.0, 1300.0, 6, 6},
    {"cc", 28.0, 0.0080, 300.0, 6000.0, 300.0, 1500.0, 4, 4},
    {"cc", 34.0, 0.0080, 300.0, 6000.0, 300.0, 1500.0, 4, 4},
    {"cc", 42.0, 0.0100, 250.0, 5000.0, 250.0, 1200.0, 3, 3},
    {"cc", 50.0, 0.0100, 250.0, 5000.0, 250.0, 1200.0, 3, 3},
    {"ct", 75.0, 0.0200, 50.0, 1000.0, 50.0, 600.0, 1, 1},
    {"ct", 100.0, 0.0300, 50.0, 1000.0, 50.0, 600.0, 1, 1},
}};

}  // namespace

PriceSeries synthetic_prices(const PriceParams& params, std::uint64_t seed) {
  if (params.days == 0 || !(params.step_minutes > 0.0) || std::fmod(1440.0, params.step_minutes) != 0.0)
    throw Error(ErrorKind::invalid_argument, "synthetic prices need days > 0 and a step dividing one day");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> spike_height(1.0 / params.spike_mean);
  std::exponential_distribution<double> dip_depth(1.0 / 25.0);

  const auto per_day = static_cast<std::size_t>(1440.0 / params.step_minutes);
  const double spike_prob = params.spikes_per_day / static_cast<double>(per_day);
  PriceSeries out;
  out.step_minutes = params.step_minutes;
  out.prices.reserve(params.days * per_day);

  double ar = 0.0;
  double spike = 0.0;
  double spike_decay = 0.0;
  for (std::size_t day = 0; day < params.days; ++day) {
    // Summer evenings run hotter, spring middays deeper.
    const double season = std::cos(2.0 * std::numbers::pi * (static_cast<double>(day) - 200.0) / 365.0);
    const double spring = std::cos(2.0 * std::numbers::pi * (static_cast<double>(day) - 110.0) / 365.0);
    const double day_shift = params.daily_sd * normal(rng);
    for (std::size_t k = 0; k < per_day; ++k) {
      const double hour = static_cast<double>(k) * params.step_minutes / 60.0;
      double base = shape_at(hour) * params.level * (1.0 + 0.2 * season);
      if (hour >= 9.0 && hour <= 16.0) base -= 6.0 * std::max(0.0, spring);
      ar = params.noise_ar * ar + params.noise_sd * normal(rng);
      if (unit(rng) < spike_prob) {
        const bool midday = hour >= 10.0 && hour <= 15.0;
        spike = (midday && unit(rng) < params.dip_share) ? -dip_depth(rng) : spike_height(rng);
        spike_decay = 0.5 + 0.4 * unit(rng);
      }
      out.prices.push_back(base + day_shift + ar + spike);
      spike *= spike_decay;
      if (std::abs(spike) < 0.5) spike = 0.0;
    }
  }
  return out;
}

std::vector<GeneratorSpec> synthetic_fleet(const FleetParams& params, std::uint64_t seed) {
  if (params.units == 0 || !(params.total_capacity_mw > 0.0))
    throw Error(ErrorKind::invalid_argument, "synthetic fleet needs units > 0 and positive capacity");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(1.0 - params.cost_jitter, 1.0 + params.cost_jitter);

  double template_total = 0.0;
  for (std::size_t i = 0; i < params.units; ++i) template_total += kUnits[i % kUnits.size()].g_max;
  const double scale = params.total_capacity_mw / template_total;

  std::vector<GeneratorSpec> fleet;
  for (std::size_t i = 0; i < params.units; ++i) {
    const UnitTemplate& u = kUnits[i % kUnits.size()];
    GeneratorSpec g;
    std::ostringstream id;
    id << u.kind << i + 1;
    g.id = id.str();
    g.c_lin = u.c_lin * jitter(rng);
    g.c_quad = u.c_quad / scale * jitter(rng);
    g.c_noload = u.c_noload * scale * jitter(rng);
    g.c_start = u.c_start * scale * jitter(rng);
    g.g_min = u.g_min * scale;
    g.g_max = u.g_max * scale;
    g.t_up = u.t_up;
    g.t_dn = u.t_dn;
    fleet.push_back(g);
  }
  return fleet;
}

std::vector<ScenarioData> synthetic_scenarios(const ScenarioParams& params, std::uint64_t seed) {
  if (params.count == 0 || params.hours == 0)
    throw Error(ErrorKind::invalid_argument, "synthetic scenarios need count > 0 and hours > 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<ScenarioData> out;
  for (std::size_t s = 0; s < params.count; ++s) {
    ScenarioData sc;
    sc.id = std::to_string(s + 1);
    const double level = params.mean_demand_mw * (1.0 + 0.05 * normal(rng));
    double wind = std::clamp(params.mean_wind_mw * (1.0 + 0.4 * normal(rng)), 0.0, params.max_wind_mw);
    for (std::size_t t = 0; t < params.hours; ++t) {
      sc.demand.push_back(std::max(0.0, level * kDemandShape[t % 24] * (1.0 + 0.01 * normal(rng))));
      wind = 0.85 * wind + 0.15 * params.mean_wind_mw + 0.08 * params.mean_wind_mw * normal(rng) * 2.0;
      wind = std::clamp(wind, 0.0, params.max_wind_mw);
      sc.wind.push_back(wind);
    }
    out.push_back(std::move(sc));
  }
  return out;
}

}  // namespace socmkt
