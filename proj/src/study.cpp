#include "socmkt/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "socmkt/clearing.hpp"
#include "socmkt/error.hpp"

namespace socmkt {

namespace {

StorageSpec at_step(const StorageSpec& spec, double step_minutes) {
  return spec.step_minutes == step_minutes ? spec : rescale_step(spec, step_minutes);
}

std::size_t whole_ratio(double num, double den, const char* what) {
  const double r = num / den;
  const double n = std::round(r);
  if (n < 1.0 || std::abs(r - n) > 1e-9) {
    std::ostringstream os;
    os << what << ": " << den << " min does not divide " << num << " min";
    throw Error(ErrorKind::invalid_argument, os.str());
  }
  return static_cast<std::size_t>(n);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double start_soc(const StorageSpec& spec, double e_init) { return e_init < spec.e_min ? spec.e_min : e_init; }

}  // namespace

StorageSpec nonlinear_template() {
  StorageSpec spec;
  spec.e_min = 0.0;
  spec.step_minutes = 60.0;
  // Ratings peak over 20-60 % SoC; efficiency and cost degrade toward both ends.
  const double d_rating[5] = {0.175, 0.25, 0.25, 0.225, 0.125};
  const double p_rating[5] = {0.25, 0.25, 0.225, 0.2, 0.15};
  const double eta[5] = {0.88, 0.92, 0.92, 0.90, 0.86};
  const double cost[5] = {26.0, 20.0, 20.0, 22.0, 28.0};
  for (int s = 0; s < 5; ++s) {
    spec.segments.push_back(SegmentSpec{0.2 * (s + 1), cost[s], d_rating[s], p_rating[s], eta[s], eta[s]});
  }
  return validate_spec(std::move(spec));
}

const std::vector<std::string>& variant_names() {
  static const std::vector<std::string> names = {"Lin", "NLA", "NLB", "NLC", "NLF", "NLL"};
  return names;
}

StorageSpec make_storage_variant(const std::string& name, const StorageSpec& base) {
  if (name == "Lin") {
    StorageSpec lin;
    lin.e_min = 0.0;
    lin.step_minutes = 60.0;
    lin.segments.push_back(SegmentSpec{1.0, 20.0, 0.25, 0.25, 0.9, 0.9});
    return at_step(validate_spec(std::move(lin)), base.step_minutes);
  }
  if (base.size() != 5) throw Error(ErrorKind::invalid_spec, "storage variants need a five-segment template");
  const double hours = base.step_minutes / 60.0;
  StorageSpec out = base;
  auto set = [&](auto field, const std::vector<double>& mw) {
    for (std::size_t s = 0; s < 5; ++s) out.segments[s].*field = mw[s] * hours;
  };
  const std::vector<double> flat(5, 0.25);
  if (name == "NLA") {
  } else if (name == "NLB") {
    set(&SegmentSpec::d_rating, flat);
  } else if (name == "NLC") {
    set(&SegmentSpec::d_rating, flat);
    set(&SegmentSpec::p_rating, flat);
  } else if (name == "NLF") {
    set(&SegmentSpec::p_rating, flat);
    set(&SegmentSpec::d_rating, {0.175, 0.25, 0.25, 0.25, 0.25});
  } else if (name == "NLL") {
    set(&SegmentSpec::p_rating, flat);
    set(&SegmentSpec::d_rating, {0.25, 0.25, 0.25, 0.225, 0.125});
  } else {
    throw Error(ErrorKind::invalid_argument, "unknown storage variant '" + name + "'");
  }
  return validate_spec(std::move(out));
}

std::string MarketModel::name() const {
  return multi ? std::string("Multi") : "RTD-" + std::to_string(segments);
}

MarketModel MarketModel::parse(const std::string& text) {
  if (text == "Multi" || text == "multi") return MarketModel{true, 0};
  if (text.rfind("RTD-", 0) == 0 || text.rfind("rtd-", 0) == 0) {
    const std::string k = text.substr(4);
    if (!k.empty() && std::all_of(k.begin(), k.end(), [](unsigned char c) { return std::isdigit(c); })) {
      const auto n = std::stoul(k);
      if (n >= 1) return MarketModel{false, n};
    }
  }
  throw Error(ErrorKind::invalid_argument, "market model must be Multi or RTD-k with k >= 1, got '" + text + "'");
}

ProfitReport settle(const StorageSpec& spec_in, const PriceSeries& prices, const std::vector<Dispatch>& dispatch) {
  const StorageSpec spec = at_step(spec_in, prices.step_minutes);
  ProfitReport r;
  for (std::size_t t = 0; t < dispatch.size(); ++t) {
    const double lambda = prices.prices[t];
    r.revenue += lambda * dispatch[t].d;
    r.cost += lambda * dispatch[t].p + discharge_cost(spec, dispatch[t]);
  }
  r.profit = r.revenue - r.cost;
  return r;
}

BacktestRun run_multi(const StorageSpec& spec_in, const PriceSeries& prices, const PriceTakerConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const StorageSpec spec = at_step(spec_in, prices.step_minutes);
  const SocGrid grid = build_grid(spec, config.points_per_mwh);
  Schedule schedule = multi_period_dispatch(spec, prices, start_soc(spec, config.e_init), grid, config.dp);
  BacktestRun run;
  run.report = settle(spec, prices, schedule.dispatch);
  run.report.model = "Multi";
  run.dispatch = std::move(schedule.dispatch);
  run.soc = std::move(schedule.soc);
  run.report.seconds = seconds_since(start);
  return run;
}

std::vector<BidCurve> build_hourly_bids(const StorageSpec& spec_in, const PriceSeries& prices, std::size_t k,
                                        const PriceTakerConfig& config) {
  validate_prices(prices);
  const double value_step = config.value_step_minutes > 0.0 ? config.value_step_minutes : prices.step_minutes;
  BidTiming timing;
  timing.intervals_per_hour = whole_ratio(60.0, prices.step_minutes, "price step");
  timing.steps_per_interval = whole_ratio(prices.step_minutes, value_step, "valuation step");
  timing.averaging = config.averaging;

  const StorageSpec value_spec = at_step(spec_in, value_step);
  const StorageSpec market = resegment(value_spec, k);
  const SocGrid grid = build_grid(value_spec, config.points_per_mwh);
  const PriceSeries value_prices = value_step == prices.step_minutes ? prices : upsample_prices(prices, value_step);

  HourlyBidBuilder builder(market, grid, config.sampling, timing, prices.size());
  backward_induction(value_spec, value_prices, grid,
                     [&](std::size_t t, std::span<const double> row) { builder(t, row); });
  std::vector<BidCurve> bids = builder.finish();
  for (auto& b : bids) b = enforce_monotone(std::move(b));
  return bids;
}

BacktestRun run_rtd(const StorageSpec& spec_in, const PriceSeries& prices, std::size_t k,
                    const PriceTakerConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<BidCurve> bids = build_hourly_bids(spec_in, prices, k, config);
  const StorageSpec spec = at_step(spec_in, prices.step_minutes);
  const StorageSpec market = resegment(spec, k);
  const std::size_t per_hour = whole_ratio(60.0, prices.step_minutes, "price step");

  BacktestRun run;
  StorageState state = state_at(spec, start_soc(spec, config.e_init));
  run.soc.reserve(prices.size() + 1);
  run.dispatch.reserve(prices.size());
  run.soc.push_back(soc_total(spec, state));
  for (std::size_t t = 0; t < prices.size(); ++t) {
    const StorageState market_state = state_at(market, run.soc.back());
    const ClearingResult cleared = clear_pricetaker(market, market_state, bids[t / per_hour], prices.prices[t]);
    Dispatch move = project_dispatch(spec, state, cleared.dispatch.p, cleared.dispatch.d);
    if (std::abs(move.p - cleared.dispatch.p) > 1e-12 || std::abs(move.d - cleared.dispatch.d) > 1e-12)
      ++run.projected;
    state = apply_dispatch(spec, state, move);
    run.soc.push_back(soc_total(spec, state));
    run.dispatch.push_back(std::move(move));
  }
  run.report = settle(spec, prices, run.dispatch);
  run.report.model = "RTD-" + std::to_string(k);
  run.report.seconds = seconds_since(start);
  return run;
}

BacktestRun run_model(const StorageSpec& spec, const PriceSeries& prices, const MarketModel& model,
                      const PriceTakerConfig& config) {
  return model.multi ? run_multi(spec, prices, config) : run_rtd(spec, prices, model.segments, config);
}

std::vector<BacktestRun> run_pricetaker_study(const StorageSpec& spec, const PriceSeries& prices,
                                              const std::vector<MarketModel>& models,
                                              const PriceTakerConfig& config) {
  std::vector<BacktestRun> runs;
  for (const auto& m : models) runs.push_back(run_model(spec, prices, m, config));
  const auto multi = std::find_if(runs.begin(), runs.end(), [](const BacktestRun& r) { return r.report.model == "Multi"; });
  if (multi != runs.end() && multi->report.profit > 0.0) {
    const double base = multi->report.profit;
    for (auto& r : runs) r.report.ratio = 100.0 * r.report.profit / base;
  }
  return runs;
}

std::vector<double> soc_histogram(const std::vector<double>& soc, double e_min, double e_max, std::size_t bins) {
  if (bins == 0 || !(e_max > e_min)) throw Error(ErrorKind::invalid_argument, "histogram needs bins > 0 and a positive range");
  std::vector<double> out(bins, 0.0);
  if (soc.empty()) return out;
  const double width = (e_max - e_min) / static_cast<double>(bins);
  for (double e : soc) {
    // Bin edges are upper-inclusive, matching the (E_{s-1}, E_s] segment convention.
    const double x = (e - e_min) / width;
    auto b = static_cast<std::size_t>(std::max(0.0, std::ceil(x - 1e-9) - 1.0));
    out[std::min(b, bins - 1)] += 1.0;
  }
  for (double& v : out) v /= static_cast<double>(soc.size());
  return out;
}

StorageSpec influencer_storage(double capacity_mw, const SweepConfig& config) {
  StorageSpec spec;
  spec.e_min = 0.0;
  spec.step_minutes = 60.0;
  spec.segments.push_back(SegmentSpec{capacity_mw * config.duration_h, config.discharge_cost, capacity_mw, capacity_mw,
                                      config.efficiency, config.efficiency});
  return validate_spec(std::move(spec));
}

namespace {

struct Accumulator {
  double cost = 0.0;
  double price_sum = 0.0;
  std::size_t price_count = 0;
  double std_sum = 0.0;
  double profit = 0.0;
  std::size_t days = 0;

  void add(double system_cost, const std::vector<double>& prices, double storage_profit) {
    cost += system_cost;
    profit += storage_profit;
    const double mean = std::accumulate(prices.begin(), prices.end(), 0.0) / static_cast<double>(prices.size());
    double var = 0.0;
    for (double p : prices) var += (p - mean) * (p - mean);
    std_sum += std::sqrt(var / static_cast<double>(prices.size()));
    price_sum += std::accumulate(prices.begin(), prices.end(), 0.0);
    price_count += prices.size();
    ++days;
  }

  SweepRow row(double share, double mw, const std::string& model, std::size_t segments) const {
    SweepRow r;
    r.capacity_share = share;
    r.capacity_mw = mw;
    r.model = model;
    r.segments = segments;
    r.mean_cost = cost / static_cast<double>(days);
    r.mean_price = price_sum / static_cast<double>(price_count);
    r.price_std = std_sum / static_cast<double>(days);
    r.storage_profit = profit / static_cast<double>(days);
    return r;
  }
};

}  // namespace

SweepResult run_priceinfluencer_study(const std::vector<GeneratorSpec>& fleet,
                                      const std::vector<ScenarioData>& scenarios, const SweepConfig& config) {
  if (scenarios.empty()) throw Error(ErrorKind::invalid_argument, "sweep needs at least one scenario");
  if (config.grid_points < 2) throw Error(ErrorKind::invalid_argument, "sweep grid needs at least 2 points");
  double peak = 0.0;
  for (const auto& sc : scenarios) {
    validate_scenario(sc);
    peak = std::max(peak, *std::max_element(sc.demand.begin(), sc.demand.end()));
  }

  std::vector<CommitmentSchedule> commitments;
  for (const auto& sc : scenarios) commitments.push_back(unit_commitment(fleet, sc));

  SweepResult result;
  for (double share : config.capacity_shares) {
    const double mw = share * peak;
    Accumulator multi;
    std::vector<Accumulator> rtd(config.segment_counts.size());
    for (std::size_t n = 0; n < scenarios.size(); ++n) {
      const auto& sc = scenarios[n];
      const auto& uc = commitments[n];
      auto record = [&](Accumulator& acc, const std::string& model, double cost, const std::vector<double>& prices,
                        double profit) {
        acc.add(cost, prices, profit);
        result.prices.push_back(ScenarioPrices{share, model, sc.id, prices});
      };
      if (mw <= 0.0) {
        record(multi, "Multi", uc.total_cost(), uc.price_da, 0.0);
        for (std::size_t j = 0; j < rtd.size(); ++j)
          record(rtd[j], "RTD-" + std::to_string(config.segment_counts[j]), uc.total_cost(), uc.price_da, 0.0);
        continue;
      }
      const StorageSpec physical = influencer_storage(mw, config);
      const SocGrid grid{physical.e_min, physical.capacity() / static_cast<double>(config.grid_points - 1),
                         config.grid_points};
      const SystemDay best = economic_dispatch_multi(fleet, uc, sc, physical, physical.e_min, grid, config.dp);
      record(multi, "Multi", best.system_cost, best.prices, best.storage_profit);

      // Bids assume the storage's own dispatch does not move prices.
      const PriceSeries forecast{60.0, uc.price_da};
      for (std::size_t j = 0; j < rtd.size(); ++j) {
        const std::size_t k = config.segment_counts[j];
        const StorageSpec market = resegment(physical, k);
        HourlyBidBuilder builder(market, grid, config.sampling, BidTiming{}, sc.hours());
        backward_induction(physical, forecast, grid, [&](std::size_t t, std::span<const double> row) { builder(t, row); });
        std::vector<BidCurve> bids = builder.finish();
        for (auto& b : bids) b = enforce_monotone(std::move(b));
        const SystemDay day = simulate_realtime_day(fleet, uc, sc, physical, market, bids, physical.e_min);
        record(rtd[j], "RTD-" + std::to_string(k), day.system_cost, day.prices, day.storage_profit);
      }
    }
    const SweepRow base = multi.row(share, mw, "Multi", 0);
    auto normalize = [&](SweepRow r) {
      r.normalized_cost = base.mean_cost > 0.0 ? r.mean_cost / base.mean_cost : 1.0;
      return r;
    };
    result.rows.push_back(normalize(base));
    for (std::size_t j = 0; j < rtd.size(); ++j) {
      const std::size_t k = config.segment_counts[j];
      result.rows.push_back(normalize(rtd[j].row(share, mw, "RTD-" + std::to_string(k), k)));
    }
  }
  return result;
}

}  // namespace socmkt
