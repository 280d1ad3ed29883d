#pragma once

// Independent brute-force references shared by the unit tests and the
// acceptance binary. Nothing here calls the greedy storage routines.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "socmkt/bidding.hpp"
#include "socmkt/storage_model.hpp"
#include "socmkt/thermal.hpp"

namespace oracle {

using socmkt::BidCurve;
using socmkt::StorageSpec;
using socmkt::StorageState;

inline constexpr double kTol = 1e-9;

// A one-sided move: per-segment grid-side quantities.
struct Move {
  bool discharge = false;
  std::vector<double> q;
  double total() const {
    double t = 0.0;
    for (double v : q) t += v;
    return t;
  }
};

inline bool fill_order_ok(const StorageSpec& spec, const std::vector<double>& e) {
  for (std::size_t s = 1; s < e.size(); ++s) {
    if (e[s] > kTol && e[s - 1] < spec.width(s - 1) - kTol) return false;
  }
  return true;
}

// Visits every one-sided move whose per-segment stored-energy change is a
// multiple of 1/n of what the segment can give (discharge) or take (charge),
// keeping those that satisfy fill order and the shared rating budget.
// Segments with nothing to give or take are pinned at zero. Both filters are
// checked on each prefix, so pruning drops only moves that would fail anyway.
inline void enumerate_side(const StorageSpec& spec, const StorageState& state, std::size_t n, bool dis,
                           const std::function<void(const Move&)>& visit) {
  const std::size_t S = spec.size();
  std::vector<double> e = state.e_seg;
  Move m{dis, std::vector<double>(S, 0.0)};
  std::function<void(std::size_t, double)> walk = [&](std::size_t s, double usage) {
    if (s == S) {
      visit(m);
      return;
    }
    const auto& seg = spec.segments[s];
    const double range = dis ? state.e_seg[s] : spec.width(s) - state.e_seg[s];
    const std::size_t top = range > 0.0 ? n : 0;
    for (std::size_t i = 0; i <= top; ++i) {
      const double x = range * static_cast<double>(i) / static_cast<double>(n);
      double use = 0.0;
      if (dis) {
        e[s] = state.e_seg[s] - x;
        m.q[s] = x * seg.eta_d;
        use = m.q[s] / seg.d_rating;
      } else {
        e[s] = state.e_seg[s] + x;
        m.q[s] = x / seg.eta_p;
        use = m.q[s] / seg.p_rating;
      }
      if (usage + use > 1.0 + kTol) break;  // usage grows with i
      if (s > 0 && e[s] > kTol && e[s - 1] < spec.width(s - 1) - kTol) continue;
      walk(s + 1, usage + use);
    }
    e[s] = state.e_seg[s];
    m.q[s] = 0.0;
  };
  walk(0, 0.0);
}

inline void enumerate_moves(const StorageSpec& spec, const StorageState& state, std::size_t n,
                            const std::function<void(const Move&)>& visit) {
  enumerate_side(spec, state, n, false, visit);
  enumerate_side(spec, state, n, true, visit);
}

inline double brute_max(const StorageSpec& spec, const StorageState& state, std::size_t n, bool discharge) {
  double best = 0.0;
  enumerate_side(spec, state, n, discharge, [&](const Move& m) { best = std::max(best, m.total()); });
  return best;
}

// Bid-weighted single-period objective of a move.
inline double bid_value(const BidCurve& bids, const Move& m, double price) {
  double v = 0.0;
  for (std::size_t s = 0; s < m.q.size(); ++s) {
    if (m.discharge)
      v += (price - bids.segments[s].discharge) * m.q[s];
    else
      v += (bids.segments[s].charge - price) * m.q[s];
  }
  return v;
}

inline StorageSpec linear_spec(double cap = 1.0, double rating = 0.25, double eta = 0.9, double cost = 20.0) {
  StorageSpec spec;
  spec.e_min = 0.0;
  spec.step_minutes = 60.0;
  spec.segments = {{cap, cost, rating, rating, eta, eta}};
  return socmkt::validate_spec(spec);
}

inline StorageSpec equal_segments(std::size_t k, double cap, double rating, double eta, double cost) {
  StorageSpec spec;
  spec.step_minutes = 60.0;
  for (std::size_t s = 0; s < k; ++s)
    spec.segments.push_back({cap * static_cast<double>(s + 1) / static_cast<double>(k), cost, rating, rating, eta, eta});
  return socmkt::validate_spec(spec);
}

inline StorageSpec random_spec(std::mt19937_64& rng, std::size_t segments) {
  std::uniform_real_distribution<double> width(0.05, 0.5);
  std::uniform_real_distribution<double> rating(0.05, 0.4);
  std::uniform_real_distribution<double> eta(0.75, 1.0);
  std::uniform_real_distribution<double> cost(0.0, 30.0);
  StorageSpec spec;
  spec.e_min = std::uniform_real_distribution<double>(0.0, 0.2)(rng);
  spec.step_minutes = 60.0;
  double e = spec.e_min;
  for (std::size_t s = 0; s < segments; ++s) {
    e += width(rng);
    spec.segments.push_back({e, cost(rng), rating(rng), rating(rng), eta(rng), eta(rng)});
  }
  return socmkt::validate_spec(spec);
}

inline StorageState random_state(std::mt19937_64& rng, const StorageSpec& spec) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  // Mix in exact boundaries so empty, full and breakpoint states show up.
  if (r < 0.1) return socmkt::state_at(spec, spec.e_min);
  if (r < 0.2) return socmkt::state_at(spec, spec.e_max());
  if (r < 0.3) {
    const auto s = static_cast<std::size_t>(u(rng) * static_cast<double>(spec.size()));
    return socmkt::state_at(spec, spec.segments[std::min(s, spec.size() - 1)].e_end);
  }
  return socmkt::state_at(spec, spec.e_min + u(rng) * spec.capacity());
}

// Strictly decreasing discharge and charge bids with B_s < G_s.
inline BidCurve random_bids(std::mt19937_64& rng, const StorageSpec& spec) {
  std::uniform_real_distribution<double> level(10.0, 80.0);
  std::uniform_real_distribution<double> step(0.5, 8.0);
  std::uniform_real_distribution<double> spread(0.5, 15.0);
  BidCurve bids;
  double g = level(rng) + 40.0;
  double b = g - spread(rng);
  for (std::size_t s = 0; s < spec.size(); ++s) {
    bids.segments.push_back({spec.lower(s), spec.segments[s].e_end, g, std::min(b, g - 0.1)});
    g -= step(rng);
    b -= step(rng);
  }
  return bids;
}

// Best cumulative profit from SoC e over the remaining prices, found by
// enumerating every sequence of moves to multiples of h. Linear device only.
inline double linear_best_profit(const socmkt::SegmentSpec& seg, double e_max, const std::vector<double>& prices, std::size_t t,
                    double e, double h) {
  if (t == prices.size()) return 0.0;
  const double lambda = prices[t];
  const auto here = static_cast<long>(std::lround(e / h));
  const auto up = static_cast<long>(std::floor(seg.p_rating * seg.eta_p / h + 1e-9));
  const auto down = static_cast<long>(std::floor(seg.d_rating / seg.eta_d / h + 1e-9));
  const auto top = static_cast<long>(std::lround(e_max / h));
  double best = -1e300;
  for (long k = std::max(0L, here - down); k <= std::min(top, here + up); ++k) {
    const double delta = static_cast<double>(k - here) * h;
    double r = 0.0;
    if (delta > 0.0) {
      r = -lambda * delta / seg.eta_p;
    } else if (delta < 0.0) {
      if (lambda < 0.0) continue;  // no discharge at negative prices
      r = (lambda - seg.cost) * (-delta) * seg.eta_d;
    }
    best = std::max(best, r + linear_best_profit(seg, e_max, prices, t + 1, static_cast<double>(k) * h, h));
  }
  return best;
}

// Thermal output at a price written out unit by unit, wind at zero cost.
inline double supply(const std::vector<socmkt::GeneratorSpec>& units, double wind, double price) {
  double total = price >= 0.0 ? wind : 0.0;
  for (const auto& g : units) {
    if (g.c_quad > 0.0)
      total += std::clamp((price - g.c_lin) / (2.0 * g.c_quad), g.g_min, g.g_max);
    else
      total += price >= g.c_lin ? g.g_max : g.g_min;
  }
  return total;
}

// Storage net output at a price: best grid move under the bid objective.
inline double response(const std::vector<Move>& moves, const BidCurve& bids, double price) {
  double best = 0.0;
  double net = 0.0;
  for (const auto& m : moves) {
    const double v = oracle::bid_value(bids, m, price);
    if (v > best + 1e-12) best = v, net = m.discharge ? m.total() : -m.total();
  }
  return net;
}

// Lowest price at which supply plus storage output covers demand. Both parts
// are non-decreasing in price, so bisection on the oracle excess suffices.
inline double crossing(const std::vector<socmkt::GeneratorSpec>& fleet, double wind, const StorageSpec& spec,
                       const StorageState& st, const BidCurve& bids, double demand, std::size_t n) {
  std::vector<Move> moves;
  enumerate_moves(spec, st, n, [&](const Move& m) { moves.push_back(m); });
  double a = -50.0, b = 500.0;
  for (int it = 0; it < 60; ++it) {
    const double m = 0.5 * (a + b);
    if (supply(fleet, wind, m) + response(moves, bids, m) >= demand - 1e-9)
      b = m;
    else
      a = m;
  }
  return b;
}

}  // namespace oracle
