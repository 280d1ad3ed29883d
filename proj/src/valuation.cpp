#include "socmkt/valuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "socmkt/error.hpp"

namespace socmkt {

namespace {

// Lookahead targets beyond the device limits. Charging past E_S is impossible,
// so the energy there is worth nothing; discharging below E_0 is impossible, so
// the (missing) energy there would be worth any price.
constexpr std::ptrdiff_t kAboveTop = -1;
constexpr std::ptrdiff_t kBelowBottom = -2;

struct PointParams {
  double cost;
  double eta_p;
  double eta_d;
  std::ptrdiff_t up;    // grid index of e + P * eta_p, or kAboveTop
  std::ptrdiff_t down;  // grid index of e - D / eta_d, or kBelowBottom
};

std::vector<PointParams> point_params(const StorageSpec& spec, const SocGrid& grid) {
  std::vector<PointParams> out(grid.count);
  const double top = spec.e_max();
  const double bottom = spec.e_min;
  const double slack = 1e-12 * std::max(1.0, std::abs(top));
  for (std::size_t i = 0; i < grid.count; ++i) {
    const double e = grid.at(i);
    const auto& seg = spec.segments[segment_at(spec, e)];
    const double up = e + seg.p_rating * seg.eta_p;
    const double down = e - seg.d_rating / seg.eta_d;
    out[i].cost = seg.cost;
    out[i].eta_p = seg.eta_p;
    out[i].eta_d = seg.eta_d;
    out[i].up = up > top + slack ? kAboveTop : static_cast<std::ptrdiff_t>(grid.nearest(up));
    out[i].down = down < bottom - slack ? kBelowBottom : static_cast<std::ptrdiff_t>(grid.nearest(down));
  }
  return out;
}

double positive(double x) { return x > 0.0 ? x : 0.0; }

void step_back(const std::vector<PointParams>& params, double price, std::span<const double> next,
               std::span<double> out) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& pp = params[i];
    const double q_up = pp.up == kAboveTop ? 0.0 : next[static_cast<std::size_t>(pp.up)];
    const double q_here = next[i];
    const double q_down = pp.down == kBelowBottom ? inf : next[static_cast<std::size_t>(pp.down)];
    double q;
    if (price <= q_up * pp.eta_p) {
      q = q_up;
    } else if (price <= q_here * pp.eta_p) {
      q = price / pp.eta_p;
    } else if (price <= positive(q_here / pp.eta_d + pp.cost)) {
      q = q_here;
    } else if (price <= positive(q_down / pp.eta_d + pp.cost)) {
      q = (price - pp.cost) * pp.eta_d;
    } else {
      q = q_down;
    }
    out[i] = q;
  }
}

}  // namespace

void validate_prices(const PriceSeries& series) {
  if (!(series.step_minutes > 0.0)) throw Error(ErrorKind::invalid_argument, "price step must be positive");
  for (std::size_t t = 0; t < series.prices.size(); ++t) {
    if (!std::isfinite(series.prices[t])) {
      std::ostringstream os;
      os << "price " << t << " is not finite";
      throw Error(ErrorKind::invalid_argument, os.str());
    }
  }
}

std::size_t SocGrid::nearest(double e) const noexcept {
  if (count <= 1 || spacing <= 0.0) return 0;
  const double x = (e - e_min) / spacing;
  const double idx = std::ceil(x - 0.5);
  if (idx <= 0.0) return 0;
  if (idx >= static_cast<double>(count - 1)) return count - 1;
  return static_cast<std::size_t>(idx);
}

SocGrid build_grid(const StorageSpec& spec, double points_per_mwh) {
  if (!(points_per_mwh > 0.0)) throw Error(ErrorKind::invalid_argument, "points_per_mwh must be positive");
  const double span = spec.capacity();
  const auto intervals = static_cast<std::size_t>(std::max(1.0, std::ceil(span * points_per_mwh - 1e-9)));
  SocGrid grid{spec.e_min, span / static_cast<double>(intervals), intervals + 1};
  double finest_move = std::numeric_limits<double>::infinity();
  for (const auto& seg : spec.segments) finest_move = std::min(finest_move, seg.p_rating * seg.eta_p);
  if (!(grid.spacing < finest_move)) {
    std::ostringstream os;
    os << "grid spacing " << grid.spacing << " MWh is not finer than the smallest charge move "
       << finest_move << " MWh";
    throw Error(ErrorKind::invalid_argument, os.str());
  }
  return grid;
}

void backward_induction(const StorageSpec& spec, const PriceSeries& prices, const SocGrid& grid,
                        const ValueVisitor& visit) {
  validate_prices(prices);
  if (prices.prices.empty()) throw Error(ErrorKind::invalid_argument, "price series is empty");
  const StorageSpec step_spec =
      spec.step_minutes == prices.step_minutes ? spec : rescale_step(spec, prices.step_minutes);
  const auto params = point_params(step_spec, grid);

  std::vector<double> next(grid.count, 0.0);
  std::vector<double> cur(grid.count, 0.0);
  const std::size_t steps = prices.size();
  visit(steps, next);
  for (std::size_t t = steps; t >= 1; --t) {
    step_back(params, prices.prices[t - 1], next, cur);
    visit(t - 1, cur);
    std::swap(next, cur);
  }
}

ValueCurve backward_induction(const StorageSpec& spec, const PriceSeries& prices,
                              const SocGrid& grid) {
  ValueCurve curve;
  curve.grid = grid;
  curve.steps = prices.size();
  curve.q.assign((curve.steps + 1) * grid.count, 0.0);
  backward_induction(spec, prices, grid, [&](std::size_t t, std::span<const double> row) {
    std::copy(row.begin(), row.end(), curve.q.begin() + static_cast<std::ptrdiff_t>(t * grid.count));
  });
  return curve;
}

double q_lookup(const ValueCurve& curve, std::size_t t, double e) {
  const double slack = 1e-12 * std::max(1.0, std::abs(curve.grid.e_max()));
  if (e < curve.grid.e_min - slack || e > curve.grid.e_max() + slack) {
    std::ostringstream os;
    os << "SoC " << e << " outside value grid [" << curve.grid.e_min << ", " << curve.grid.e_max() << "]";
    throw Error(ErrorKind::invalid_argument, os.str());
  }
  if (t > curve.steps) throw Error(ErrorKind::invalid_argument, "step index beyond value horizon");
  return curve.row(t)[curve.grid.nearest(e)];
}

PriceSeries upsample_prices(const PriceSeries& series, double target_step_minutes) {
  if (!(target_step_minutes > 0.0)) throw Error(ErrorKind::invalid_argument, "target step must be positive");
  const double ratio = series.step_minutes / target_step_minutes;
  const double factor = std::round(ratio);
  if (factor < 1.0 || std::abs(ratio - factor) > 1e-9) {
    std::ostringstream os;
    os << "target step " << target_step_minutes << " min does not divide source step "
       << series.step_minutes << " min";
    throw Error(ErrorKind::invalid_argument, os.str());
  }
  const auto m = static_cast<std::size_t>(factor);
  PriceSeries out;
  out.step_minutes = target_step_minutes;
  out.prices.reserve(series.size() * m);
  for (double p : series.prices) out.prices.insert(out.prices.end(), m, p);
  return out;
}

}  // namespace socmkt
