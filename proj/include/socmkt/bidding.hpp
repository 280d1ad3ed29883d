#pragma once

// Hourly SoC-segment bids built from value-to-go curves.
//
// For each bid segment the mean opportunity value q-bar is taken over N_s
// SoC samples and over the hour's market intervals, then
//   discharge bid G_s = C_s + q-bar / eta_d_s
//   charge bid    B_s = eta_p_s * q-bar

#include <cstddef>
#include <span>
#include <vector>

#include "socmkt/storage_model.hpp"
#include "socmkt/valuation.hpp"

namespace socmkt {

/// Minimum gap between consecutive segment bids after enforcement ($/MWh).
inline constexpr double kBidTick = 0.01;

struct SegmentBid {
  double e_lo = 0.0;
  double e_hi = 0.0;
  double discharge = 0.0;  // G_s
  double charge = 0.0;     // B_s
};

struct BidCurve {
  std::size_t hour = 0;
  std::vector<SegmentBid> segments;  // ascending SoC
};

struct SamplingPlan {
  std::size_t samples_per_segment = 5;
};

enum class BidAveraging {
  hour_mean,   // mean over every market interval in the hour
  hour_start,  // first interval of the hour only
};

/// Maps hours onto rows of a value curve. Market interval k (1-based) ends at
/// value step k * steps_per_interval.
struct BidTiming {
  std::size_t intervals_per_hour = 1;
  std::size_t steps_per_interval = 1;
  BidAveraging averaging = BidAveraging::hour_mean;
};

/// Mean of q over the N_s midpoint samples of each segment of `market`.
std::vector<double> segment_value_means(const SocGrid& grid, std::span<const double> q_row,
                                        const StorageSpec& market, const SamplingPlan& plan);

BidCurve bids_from_values(const StorageSpec& market, std::size_t hour,
                          std::span<const double> q_bar);

BidCurve make_bids(const ValueCurve& curve, const StorageSpec& market, std::size_t hour,
                   const SamplingPlan& plan, const BidTiming& timing = {});

/// Number of (possibly partial) hours covered by `intervals` market intervals.
std::size_t hour_count(std::size_t intervals, const BidTiming& timing);

/// Least-squares fit of y by a sequence with x_s - x_{s+1} >= gap.
std::vector<double> decreasing_fit(std::span<const double> y, double gap);

/// Applies decreasing_fit to the discharge and the charge bids separately.
BidCurve enforce_monotone(BidCurve bids, double gap = kBidTick);

bool strictly_decreasing(const BidCurve& bids);

/// Builds every hour's bids while consuming value rows from backward_induction,
/// so a long horizon never has to be held in memory.
class HourlyBidBuilder {
 public:
  HourlyBidBuilder(StorageSpec market, SocGrid grid, SamplingPlan plan, BidTiming timing,
                   std::size_t intervals);

  void operator()(std::size_t t, std::span<const double> q_row);

  /// Bids for every hour, in hour order. Throws if some hour saw no rows.
  std::vector<BidCurve> finish() const;

 private:
  StorageSpec market_;
  SocGrid grid_;
  SamplingPlan plan_;
  BidTiming timing_;
  std::size_t intervals_;
  std::vector<std::vector<double>> sums_;
  std::vector<std::size_t> counts_;
};

}  // namespace socmkt
