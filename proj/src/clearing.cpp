#include "socmkt/clearing.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "socmkt/error.hpp"

namespace socmkt {

namespace {

void check_bids(const StorageSpec& market, const BidCurve& bids) {
  if (bids.segments.size() != market.size()) {
    std::ostringstream os;
    os << "bid curve has " << bids.segments.size() << " segments, market model has " << market.size();
    throw Error(ErrorKind::invalid_argument, os.str());
  }
  if (!strictly_decreasing(bids))
    throw Error(ErrorKind::invalid_argument,
                "bids must strictly decrease with SoC for binary-free clearing");
}

bool discharges(double bid, double price, bool inclusive) {
  return inclusive ? bid <= price : bid < price;
}

bool charges(double bid, double price, bool inclusive) {
  return inclusive ? bid >= price : bid > price;
}

// Discharge and charge ties are controlled separately: the largest net output
// at a price takes discharge ties and skips charge ties, the smallest the reverse.
Dispatch respond(const StorageSpec& market, const StorageState& state, const BidCurve& bids,
                 double price, bool discharge_ties, bool charge_ties) {
  Dispatch out_d;
  Dispatch out_p;
  if (auto top = discharge_segment(state);
      top && discharges(bids.segments[*top].discharge, price, discharge_ties)) {
    std::size_t floor = *top;
    while (floor > 0 && discharges(bids.segments[floor - 1].discharge, price, discharge_ties)) --floor;
    out_d = drain_to_segment(market, state, floor);
  }
  if (auto bottom = charge_segment(market, state);
      bottom && charges(bids.segments[*bottom].charge, price, charge_ties)) {
    std::size_t ceiling = *bottom;
    while (ceiling + 1 < market.size() && charges(bids.segments[ceiling + 1].charge, price, charge_ties))
      ++ceiling;
    out_p = fill_to_segment(market, state, ceiling);
  }
  const bool has_d = out_d.d > 0.0;
  const bool has_p = out_p.p > 0.0;
  if (has_d && has_p) {
    return bid_objective(bids, out_d, price) >= bid_objective(bids, out_p, price) ? out_d : out_p;
  }
  if (has_d) return out_d;
  if (has_p) return out_p;
  return idle_dispatch(market);
}

}  // namespace

double bid_objective(const BidCurve& bids, const Dispatch& dispatch, double price) {
  double value = price * (dispatch.d - dispatch.p);
  for (std::size_t s = 0; s < bids.segments.size(); ++s) {
    value -= bids.segments[s].discharge * dispatch.d_seg[s] - bids.segments[s].charge * dispatch.p_seg[s];
  }
  return value;
}

ClearingResult clear_pricetaker(const StorageSpec& market, const StorageState& state,
                                const BidCurve& bids, double price) {
  check_bids(market, bids);
  return ClearingResult{respond(market, state, bids, price, false, false), price};
}

double storage_response(const StorageSpec& market, const StorageState& state, const BidCurve& bids,
                        double price, bool upper) {
  check_bids(market, bids);
  return respond(market, state, bids, price, upper, !upper).net_output();
}

InfluencerClearing clear_priceinfluencer(std::span<const GeneratorSpec> online, double demand,
                                         double wind_available, const StorageSpec& market,
                                         const StorageState& state, const BidCurve& bids) {
  check_bids(market, bids);
  // Upper and lower ends of the total supply correspondence at a price.
  auto excess = [&](double price, bool upper) {
    return supply_at(online, wind_available, price, upper) +
           respond(market, state, bids, price, upper, !upper).net_output() - demand;
  };

  std::vector<double> marks = supply_breakpoints(online, wind_available);
  for (const auto& seg : bids.segments) {
    marks.push_back(seg.discharge);
    marks.push_back(seg.charge);
  }
  std::sort(marks.begin(), marks.end());
  const double span = std::max(1.0, marks.back() - marks.front());
  const double lo = marks.front() - span;
  const double hi = marks.back() + span;
  const double tol = 1e-9 * std::max(1.0, std::abs(demand));

  if (const double gap = excess(hi, true); gap < -tol) {
    std::ostringstream os;
    os << "demand " << demand << " MW exceeds supply plus storage discharge by " << -gap << " MW";
    throw Error(ErrorKind::infeasible, os.str());
  }
  if (const double gap = excess(lo, false); gap > tol) {
    std::ostringstream os;
    os << "minimum generation exceeds demand plus storage charge by " << gap << " MW";
    throw Error(ErrorKind::infeasible, os.str());
  }

  double a = lo;
  double b = hi;
  while (b - a > kPriceTolerance) {
    const double m = 0.5 * (a + b);
    if (excess(m, true) >= -tol) {
      b = m;
    } else {
      a = m;
    }
  }
  // A crossing on a jump of either curve lands on that breakpoint.
  double price = b;
  double best = 2.0 * kPriceTolerance;
  for (double mark : marks) {
    if (mark >= a - kPriceTolerance && mark <= b + kPriceTolerance && std::abs(mark - b) < best) {
      best = std::abs(mark - b);
      price = mark;
    }
  }

  const double s_lo = respond(market, state, bids, price, false, true).net_output();
  const double s_hi = respond(market, state, bids, price, true, false).net_output();
  const double t_hi = supply_at(online, wind_available, price, true);
  const double net = std::clamp(demand - t_hi, s_lo, s_hi);

  const Envelope env = feasible_envelope(market, state);
  Dispatch dispatch;
  if (net > 0.0) {
    dispatch = plan_discharge(market, state, std::min(net, env.max_discharge));
  } else if (net < 0.0) {
    dispatch = plan_charge(market, state, std::min(-net, env.max_charge));
  } else {
    dispatch = idle_dispatch(market);
  }

  InfluencerClearing out;
  out.thermal = thermal_dispatch(online, demand - dispatch.net_output(), wind_available);
  const bool storage_marginal = net > s_lo + tol && net < s_hi - tol;
  out.storage = ClearingResult{std::move(dispatch), storage_marginal ? price : out.thermal.price};
  return out;
}

}  // namespace socmkt
