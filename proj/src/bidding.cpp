#include "socmkt/bidding.hpp"

#include <sstream>

#include "socmkt/error.hpp"

namespace socmkt {

namespace {

// Hour served by value row t, or npos if t is not the end of a market interval
// that the averaging rule uses.
std::size_t hour_of_row(std::size_t t, const BidTiming& timing, std::size_t intervals) {
  constexpr auto npos = static_cast<std::size_t>(-1);
  if (t == 0 || t % timing.steps_per_interval != 0) return npos;
  const std::size_t k = t / timing.steps_per_interval;  // 1-based interval
  if (k > intervals) return npos;
  const std::size_t hour = (k - 1) / timing.intervals_per_hour;
  if (timing.averaging == BidAveraging::hour_start && (k - 1) % timing.intervals_per_hour != 0) return npos;
  return hour;
}

void check_timing(const BidTiming& timing) {
  if (timing.intervals_per_hour == 0 || timing.steps_per_interval == 0)
    throw Error(ErrorKind::invalid_argument, "bid timing needs positive interval counts");
}

}  // namespace

std::vector<double> segment_value_means(const SocGrid& grid, std::span<const double> q_row,
                                        const StorageSpec& market, const SamplingPlan& plan) {
  if (plan.samples_per_segment == 0) throw Error(ErrorKind::invalid_argument, "N_s must be at least 1");
  const auto n = static_cast<double>(plan.samples_per_segment);
  std::vector<double> out(market.size(), 0.0);
  for (std::size_t s = 0; s < market.size(); ++s) {
    const double lo = market.lower(s);
    const double w = market.width(s);
    double sum = 0.0;
    for (std::size_t i = 0; i < plan.samples_per_segment; ++i) {
      const double e = lo + (static_cast<double>(i) + 0.5) * w / n;
      sum += q_row[grid.nearest(e)];
    }
    out[s] = sum / n;
  }
  return out;
}

BidCurve bids_from_values(const StorageSpec& market, std::size_t hour,
                          std::span<const double> q_bar) {
  BidCurve bids;
  bids.hour = hour;
  bids.segments.reserve(market.size());
  for (std::size_t s = 0; s < market.size(); ++s) {
    const auto& seg = market.segments[s];
    bids.segments.push_back(SegmentBid{market.lower(s), seg.e_end, seg.cost + q_bar[s] / seg.eta_d,
                                       seg.eta_p * q_bar[s]});
  }
  return bids;
}

BidCurve make_bids(const ValueCurve& curve, const StorageSpec& market, std::size_t hour,
                   const SamplingPlan& plan, const BidTiming& timing) {
  check_timing(timing);
  const std::size_t intervals = curve.steps / timing.steps_per_interval;
  std::vector<double> acc(market.size(), 0.0);
  std::size_t rows = 0;
  for (std::size_t k = hour * timing.intervals_per_hour + 1;
       k <= std::min(intervals, (hour + 1) * timing.intervals_per_hour); ++k) {
    const std::size_t t = k * timing.steps_per_interval;
    if (hour_of_row(t, timing, intervals) != hour) continue;
    const auto means = segment_value_means(curve.grid, curve.row(t), market, plan);
    for (std::size_t s = 0; s < acc.size(); ++s) acc[s] += means[s];
    ++rows;
  }
  if (rows == 0) {
    std::ostringstream os;
    os << "value curve does not cover hour " << hour;
    throw Error(ErrorKind::invalid_argument, os.str());
  }
  for (double& v : acc) v /= static_cast<double>(rows);
  return bids_from_values(market, hour, acc);
}

std::size_t hour_count(std::size_t intervals, const BidTiming& timing) {
  check_timing(timing);
  return (intervals + timing.intervals_per_hour - 1) / timing.intervals_per_hour;
}

std::vector<double> decreasing_fit(std::span<const double> y, double gap) {
  const std::size_t n = y.size();
  bool ok = true;
  for (std::size_t s = 0; s + 1 < n && ok; ++s) ok = y[s] - y[s + 1] >= gap;
  if (ok) return {y.begin(), y.end()};

  // Shift by s * gap to turn the gap constraint into plain non-increase, then
  // pool adjacent violators.
  struct Block {
    double sum;
    std::size_t len;
    double mean() const { return sum / static_cast<double>(len); }
  };
  std::vector<Block> blocks;
  for (std::size_t s = 0; s < n; ++s) {
    blocks.push_back({y[s] + static_cast<double>(s) * gap, 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() < blocks.back().mean()) {
      const Block last = blocks.back();
      blocks.pop_back();
      blocks.back().sum += last.sum;
      blocks.back().len += last.len;
    }
  }
  std::vector<double> out;
  out.reserve(n);
  for (const auto& b : blocks) {
    for (std::size_t j = 0; j < b.len; ++j) {
      out.push_back(b.mean() - static_cast<double>(out.size()) * gap);
    }
  }
  return out;
}

BidCurve enforce_monotone(BidCurve bids, double gap) {
  std::vector<double> g, b;
  for (const auto& seg : bids.segments) {
    g.push_back(seg.discharge);
    b.push_back(seg.charge);
  }
  const auto g_fit = decreasing_fit(g, gap);
  const auto b_fit = decreasing_fit(b, gap);
  for (std::size_t s = 0; s < bids.segments.size(); ++s) {
    bids.segments[s].discharge = g_fit[s];
    bids.segments[s].charge = b_fit[s];
  }
  return bids;
}

bool strictly_decreasing(const BidCurve& bids) {
  for (std::size_t s = 0; s + 1 < bids.segments.size(); ++s) {
    if (!(bids.segments[s].discharge > bids.segments[s + 1].discharge)) return false;
    if (!(bids.segments[s].charge > bids.segments[s + 1].charge)) return false;
  }
  return true;
}

HourlyBidBuilder::HourlyBidBuilder(StorageSpec market, SocGrid grid, SamplingPlan plan,
                                   BidTiming timing, std::size_t intervals)
    : market_(std::move(market)), grid_(grid), plan_(plan), timing_(timing), intervals_(intervals) {
  const std::size_t hours = hour_count(intervals_, timing_);
  sums_.assign(hours, std::vector<double>(market_.size(), 0.0));
  counts_.assign(hours, 0);
}

void HourlyBidBuilder::operator()(std::size_t t, std::span<const double> q_row) {
  const std::size_t hour = hour_of_row(t, timing_, intervals_);
  if (hour >= sums_.size()) return;
  const auto means = segment_value_means(grid_, q_row, market_, plan_);
  for (std::size_t s = 0; s < means.size(); ++s) sums_[hour][s] += means[s];
  ++counts_[hour];
}

std::vector<BidCurve> HourlyBidBuilder::finish() const {
  std::vector<BidCurve> out;
  out.reserve(sums_.size());
  for (std::size_t h = 0; h < sums_.size(); ++h) {
    if (counts_[h] == 0) {
      std::ostringstream os;
      os << "no value rows reached hour " << h;
      throw Error(ErrorKind::invalid_argument, os.str());
    }
    std::vector<double> mean = sums_[h];
    for (double& v : mean) v /= static_cast<double>(counts_[h]);
    out.push_back(bids_from_values(market_, h, mean));
  }
  return out;
}

}  // namespace socmkt
