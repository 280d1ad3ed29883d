#pragma once

// Convex thermal supply: equal-incremental-cost dispatch of online units with
// quadratic energy costs, plus zero-cost wind that is curtailed only when the
// online units cannot back down far enough.

#include <span>
#include <string>
#include <vector>

namespace socmkt {

struct GeneratorSpec {
  std::string id;
  double c_lin = 0.0;     // $/MWh
  double c_quad = 0.0;    // $/MW^2h
  double c_noload = 0.0;  // $/h
  double c_start = 0.0;   // $
  double g_min = 0.0;     // MW
  double g_max = 0.0;     // MW
  int t_up = 1;           // h
  int t_dn = 1;           // h

  double marginal_cost(double g) const noexcept { return c_lin + 2.0 * c_quad * g; }
  double energy_cost(double g) const noexcept { return c_lin * g + c_quad * g * g; }
  /// Average cost per MWh at full output, used for the priority list.
  double full_load_average_cost() const noexcept;
};

void validate_generator(const GeneratorSpec& gen);

struct ThermalDispatch {
  std::vector<double> output;  // MW per online unit, same order as the input
  double wind = 0.0;           // accommodated wind (MW)
  double price = 0.0;          // system incremental cost ($/MWh)
  double cost = 0.0;           // energy cost of thermal output ($/h)
};

/// Serves `load` MW from `wind_available` MW of wind plus the online units.
/// Throws Error(infeasible) when load falls outside the reachable range.
ThermalDispatch thermal_dispatch(std::span<const GeneratorSpec> online, double load,
                                 double wind_available = 0.0);

/// Total wind plus thermal output offered at `price`. With `inclusive`, units
/// whose marginal cost equals the price count at their upper quantity.
double supply_at(std::span<const GeneratorSpec> online, double wind_available, double price,
                 bool inclusive);

/// Prices at which the supply curve has kinks or jumps.
std::vector<double> supply_breakpoints(std::span<const GeneratorSpec> online, double wind_available);

}  // namespace socmkt
