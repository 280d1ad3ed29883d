#pragma once

// Single-period, bid-based storage dispatch.
//
// With bids strictly decreasing in SoC the fill-order binaries can be dropped:
// a segment discharges when its bid is below the price and charges when its
// bid is above it, and the greedy top-down / bottom-up order already respects
// the segment transition logic.

#include <span>
#include <vector>

#include "socmkt/bidding.hpp"
#include "socmkt/storage_model.hpp"
#include "socmkt/thermal.hpp"

namespace socmkt {

struct ClearingResult {
  Dispatch dispatch;
  double price = 0.0;
};

/// Bid-weighted objective lambda * (d - p) - sum(G_s d_s - B_s p_s).
double bid_objective(const BidCurve& bids, const Dispatch& dispatch, double price);

/// Storage response to an exogenous price. At G_s == price or B_s == price the
/// segment is left idle.
ClearingResult clear_pricetaker(const StorageSpec& market, const StorageState& state,
                                const BidCurve& bids, double price);

/// Largest (`upper`) or smallest net output d - p consistent with the bids at
/// `price`. The two differ only when some bid equals the price.
double storage_response(const StorageSpec& market, const StorageState& state, const BidCurve& bids,
                        double price, bool upper);

/// Bisection tolerance on the clearing price ($/MWh).
inline constexpr double kPriceTolerance = 1e-6;

struct InfluencerClearing {
  ClearingResult storage;
  ThermalDispatch thermal;
};

/// Joint clearing of storage bids against the online thermal stack and wind for
/// a single period. Storage quantities at the clearing price follow
/// clear_pricetaker; a storage segment that sets the price is cleared partially.
InfluencerClearing clear_priceinfluencer(std::span<const GeneratorSpec> online, double demand,
                                         double wind_available, const StorageSpec& market,
                                         const StorageState& state, const BidCurve& bids);

}  // namespace socmkt
