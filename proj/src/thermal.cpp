#include "socmkt/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "socmkt/error.hpp"

namespace socmkt {

namespace {

double unit_supply(const GeneratorSpec& g, double price, bool inclusive) {
  if (g.g_max <= g.g_min) return g.g_min;
  if (g.c_quad > 0.0) return std::clamp((price - g.c_lin) / (2.0 * g.c_quad), g.g_min, g.g_max);
  if (price < g.c_lin) return g.g_min;
  if (price > g.c_lin) return g.g_max;
  return inclusive ? g.g_max : g.g_min;
}

std::vector<GeneratorSpec> with_wind(std::span<const GeneratorSpec> online, double wind) {
  std::vector<GeneratorSpec> units(online.begin(), online.end());
  if (wind > 0.0) {
    GeneratorSpec w;
    w.id = "wind";
    w.g_max = wind;
    units.push_back(w);
  }
  return units;
}

double total_supply(const std::vector<GeneratorSpec>& units, double price, bool inclusive) {
  double total = 0.0;
  for (const auto& g : units) total += unit_supply(g, price, inclusive);
  return total;
}

std::vector<double> breakpoints_of(const std::vector<GeneratorSpec>& units) {
  std::vector<double> out;
  for (const auto& g : units) {
    if (g.c_quad > 0.0) {
      out.push_back(g.marginal_cost(g.g_min));
      out.push_back(g.marginal_cost(g.g_max));
    } else {
      out.push_back(g.c_lin);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

double GeneratorSpec::full_load_average_cost() const noexcept {
  if (g_max <= 0.0) return c_lin;
  return (energy_cost(g_max) + c_noload) / g_max;
}

void validate_generator(const GeneratorSpec& gen) {
  auto fail = [&](const char* msg) {
    std::ostringstream os;
    os << "generator " << gen.id << ": " << msg;
    throw Error(ErrorKind::invalid_spec, os.str());
  };
  if (!(gen.g_min >= 0.0) || !(gen.g_max >= gen.g_min)) fail("need 0 <= g_min <= g_max");
  if (gen.t_up < 1 || gen.t_dn < 1) fail("minimum up/down times must be at least 1 h");
  if (!(gen.c_lin >= 0.0) || !(gen.c_quad >= 0.0) || !(gen.c_noload >= 0.0) || !(gen.c_start >= 0.0))
    fail("costs must be non-negative");
}

double supply_at(std::span<const GeneratorSpec> online, double wind_available, double price,
                 bool inclusive) {
  return total_supply(with_wind(online, wind_available), price, inclusive);
}

std::vector<double> supply_breakpoints(std::span<const GeneratorSpec> online, double wind_available) {
  return breakpoints_of(with_wind(online, wind_available));
}

ThermalDispatch thermal_dispatch(std::span<const GeneratorSpec> online, double load,
                                 double wind_available) {
  const auto units = with_wind(online, wind_available);
  const bool has_wind = units.size() > online.size();
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& g : units) {
    lo += g.g_min;
    hi += g.g_max;
  }
  const double tol = 1e-9 * std::max(1.0, std::abs(load));
  if (units.empty() || load < lo - tol || load > hi + tol) {
    std::ostringstream os;
    os << "load " << load << " MW outside deliverable range [" << lo << ", " << hi << "] MW";
    throw Error(ErrorKind::infeasible, os.str());
  }

  const auto bps = breakpoints_of(units);
  double price = bps.front();
  bool at_jump = true;
  if (load > total_supply(units, bps.front(), true) + tol) {
    for (std::size_t k = 1; k < bps.size(); ++k) {
      const double below = total_supply(units, bps[k - 1], true);
      const double upper = total_supply(units, bps[k], true);
      if (load > upper + tol) continue;
      const double strict = total_supply(units, bps[k], false);
      if (load >= strict - tol) {
        price = bps[k];
      } else {
        // Continuous stretch between breakpoints: only quadratic units move.
        double slope = 0.0;
        for (const auto& g : units) {
          if (g.c_quad > 0.0 && g.marginal_cost(g.g_min) <= bps[k - 1] && g.marginal_cost(g.g_max) >= bps[k])
            slope += 1.0 / (2.0 * g.c_quad);
        }
        price = slope > 0.0 ? bps[k - 1] + (load - below) / slope : bps[k];
        at_jump = false;
      }
      break;
    }
    if (load > total_supply(units, bps.back(), true) + tol) price = bps.back();
  }

  ThermalDispatch out;
  std::vector<double> g(units.size());
  double placed = 0.0;
  for (std::size_t i = 0; i < units.size(); ++i) {
    g[i] = unit_supply(units[i], price, false);
    placed += g[i];
  }
  // Units sitting exactly at the price take up the remainder in input order.
  double rest = load - placed;
  if (at_jump) {
    for (std::size_t i = 0; i < units.size() && rest > 0.0; ++i) {
      const auto& u = units[i];
      if (u.c_quad > 0.0 || u.c_lin != price) continue;
      const double add = std::min(rest, u.g_max - g[i]);
      g[i] += add;
      rest -= add;
    }
  }
  // Round-off residual goes to any unit with room.
  for (std::size_t i = 0; i < units.size() && std::abs(rest) > 0.0; ++i) {
    const double next = std::clamp(g[i] + rest, units[i].g_min, units[i].g_max);
    rest -= next - g[i];
    g[i] = next;
  }

  out.price = price;
  out.output.assign(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(online.size()));
  out.wind = has_wind ? g.back() : 0.0;
  for (std::size_t i = 0; i < online.size(); ++i) out.cost += online[i].energy_cost(g[i]);
  return out;
}

}  // namespace socmkt
