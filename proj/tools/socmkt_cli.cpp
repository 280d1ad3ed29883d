// socmkt: command-line front end for the storage market simulator.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "socmkt/error.hpp"
#include "socmkt/io.hpp"
#include "socmkt/study.hpp"
#include "socmkt/synthetic.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace socmkt;

namespace {

void emit(const json& j) { std::cout << j.dump(2) << '\n'; }

int fail(const std::string& kind, const std::string& message) {
  emit(json{{"error", {{"kind", kind}, {"message", message}}}});
  return kind == "usage" ? 2 : 1;
}

std::string csv_text(const auto& write) {
  std::ostringstream os;
  write(os);
  return os.str();
}

StorageSpec load_storage(const std::string& path, const std::string& variant) {
  if (!path.empty()) {
    StorageSpec spec = read_file(path, parse_storage);
    return variant.empty() ? spec : make_storage_variant(variant, spec);
  }
  return make_storage_variant(variant.empty() ? "NLA" : variant);
}

BidAveraging parse_averaging(const std::string& text) {
  if (text == "mean") return BidAveraging::hour_mean;
  if (text == "start") return BidAveraging::hour_start;
  throw Error(ErrorKind::invalid_argument, "averaging must be 'mean' or 'start'");
}

struct Options {
  std::string storage, variant, prices, fleet, scenarios, bids, out, out_dir;
  double points_per_mwh = 1000.0;
  double value_step = 0.0;
  std::size_t samples = 5;
  std::string averaging = "mean";
  std::size_t segments = 5;
  std::vector<std::string> models = {"Multi", "RTD-5", "RTD-1"};
  double e_init = -1.0;
  std::size_t bins = 10;
  bool trajectories = false;
  std::vector<double> capacities = {0.0, 0.05, 0.10, 0.15, 0.20};
  std::vector<std::size_t> segment_counts = {1, 2, 5, 10};
  std::size_t grid_points = 401;
  std::string kind;
  std::uint64_t seed = 1;
  std::size_t days = 365;
  double step = 5.0;
  std::size_t units = 10;
  std::size_t count = 5;
  std::string start = "2016-01-01T00:00:00";
};

PriceTakerConfig pricetaker_config(const Options& o) {
  PriceTakerConfig c;
  c.points_per_mwh = o.points_per_mwh;
  c.value_step_minutes = o.value_step;
  c.sampling.samples_per_segment = o.samples;
  c.averaging = parse_averaging(o.averaging);
  c.e_init = o.e_init;
  return c;
}

int cmd_validate(const Options& o) {
  json report{{"ok", true}};
  if (!o.storage.empty()) {
    const auto spec = read_file(o.storage, parse_storage);
    report["storage"] = {{"segments", spec.size()}, {"e_min_mwh", spec.e_min}, {"e_max_mwh", spec.e_max()},
                         {"step_minutes", spec.step_minutes}};
  }
  if (!o.prices.empty()) {
    const auto p = read_file(o.prices, parse_prices);
    report["prices"] = {{"intervals", p.size()}, {"step_minutes", p.step_minutes},
                        {"min", *std::min_element(p.prices.begin(), p.prices.end())},
                        {"max", *std::max_element(p.prices.begin(), p.prices.end())}};
  }
  if (!o.fleet.empty()) report["fleet"] = {{"units", read_file(o.fleet, parse_fleet).size()}};
  if (!o.scenarios.empty()) report["scenarios"] = {{"count", read_file(o.scenarios, parse_scenarios).size()}};
  if (!o.bids.empty()) {
    const auto bids = read_file(o.bids, parse_bids);
    std::size_t bad = 0;
    for (const auto& b : bids) bad += strictly_decreasing(b) ? 0 : 1;
    report["bids"] = {{"hours", bids.size()}, {"non_monotone_hours", bad}};
  }
  if (report.size() == 1) throw Error(ErrorKind::invalid_argument, "nothing to validate, pass at least one file");
  emit(report);
  return 0;
}

int cmd_value(const Options& o) {
  const StorageSpec spec = load_storage(o.storage, o.variant);
  PriceSeries prices = read_file(o.prices, parse_prices);
  if (o.value_step > 0.0 && o.value_step != prices.step_minutes) prices = upsample_prices(prices, o.value_step);
  const StorageSpec step_spec = spec.step_minutes == prices.step_minutes ? spec : rescale_step(spec, prices.step_minutes);
  const SocGrid grid = build_grid(step_spec, o.points_per_mwh);
  const ValueCurve curve = backward_induction(step_spec, prices, grid);
  write_text(o.out, csv_text([&](std::ostream& os) { write_value_curve(os, curve); }));
  emit({{"ok", true}, {"steps", curve.steps}, {"grid_points", grid.count}, {"out", o.out}});
  return 0;
}

int cmd_bid(const Options& o) {
  const StorageSpec spec = load_storage(o.storage, o.variant);
  const PriceSeries prices = read_file(o.prices, parse_prices);
  const auto bids = build_hourly_bids(spec, prices, o.segments, pricetaker_config(o));
  write_text(o.out, csv_text([&](std::ostream& os) { write_bids(os, bids); }));
  emit({{"ok", true}, {"hours", bids.size()}, {"segments", o.segments}, {"out", o.out}});
  return 0;
}

int cmd_backtest(const Options& o) {
  const StorageSpec spec = load_storage(o.storage, o.variant);
  const PriceSeries prices = read_file(o.prices, parse_prices);
  std::vector<MarketModel> models;
  for (const auto& m : o.models) models.push_back(MarketModel::parse(m));
  const auto runs = run_pricetaker_study(spec, prices, models, pricetaker_config(o));

  const fs::path dir = o.out_dir;
  std::ostringstream table;
  table << "model,revenue_usd,cost_usd,profit_usd,profit_ratio_pct,seconds,projected_intervals\n";
  std::ostringstream hist;
  hist << "model,bin,soc_lo_mwh,soc_hi_mwh,share\n";
  json summary{{"ok", true}, {"intervals", prices.size()}, {"step_minutes", prices.step_minutes}, {"models", json::array()}};
  for (const auto& run : runs) {
    const auto& r = run.report;
    table << r.model << ',' << r.revenue << ',' << r.cost << ',' << r.profit << ',' << r.ratio << ',' << r.seconds << ','
          << run.projected << '\n';
    const auto shares = soc_histogram(run.soc, spec.e_min, spec.e_max(), o.bins);
    const double w = spec.capacity() / static_cast<double>(o.bins);
    for (std::size_t b = 0; b < shares.size(); ++b)
      hist << r.model << ',' << b << ',' << spec.e_min + w * static_cast<double>(b) << ','
           << spec.e_min + w * static_cast<double>(b + 1) << ',' << shares[b] << '\n';
    summary["models"].push_back({{"model", r.model}, {"revenue_usd", r.revenue}, {"cost_usd", r.cost},
                                 {"profit_usd", r.profit}, {"profit_ratio_pct", r.ratio}, {"seconds", r.seconds},
                                 {"projected_intervals", run.projected}});
    if (o.trajectories) {
      std::ostringstream traj;
      traj << "t,price_usd_per_mwh,charge_mwh,discharge_mwh,soc_end_mwh\n";
      for (std::size_t t = 0; t < run.dispatch.size(); ++t)
        traj << t << ',' << prices.prices[t] << ',' << run.dispatch[t].p << ',' << run.dispatch[t].d << ','
             << run.soc[t + 1] << '\n';
      write_text(dir / ("dispatch_" + r.model + ".csv"), traj.str());
    }
  }
  write_text(dir / "profit.csv", table.str());
  write_text(dir / "soc_histogram.csv", hist.str());
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  emit(summary);
  return 0;
}

int cmd_market(const Options& o) {
  const auto fleet = read_file(o.fleet, parse_fleet);
  const auto scenarios = read_file(o.scenarios, parse_scenarios);
  SweepConfig config;
  config.capacity_shares = o.capacities;
  config.segment_counts = o.segment_counts;
  config.grid_points = o.grid_points;
  config.sampling.samples_per_segment = o.samples;
  const SweepResult result = run_priceinfluencer_study(fleet, scenarios, config);

  const fs::path dir = o.out_dir;
  std::ostringstream table;
  table << "capacity_share,capacity_mw,model,segments,mean_system_cost_usd,normalized_cost,mean_price_usd_per_mwh,"
           "price_std_usd_per_mwh,storage_profit_usd\n";
  json summary{{"ok", true}, {"scenarios", scenarios.size()}, {"rows", json::array()}};
  for (const auto& r : result.rows) {
    table << r.capacity_share << ',' << r.capacity_mw << ',' << r.model << ',' << r.segments << ',' << r.mean_cost
          << ',' << r.normalized_cost << ',' << r.mean_price << ',' << r.price_std << ',' << r.storage_profit << '\n';
    summary["rows"].push_back({{"capacity_share", r.capacity_share}, {"capacity_mw", r.capacity_mw},
                               {"model", r.model}, {"mean_system_cost_usd", r.mean_cost},
                               {"normalized_cost", r.normalized_cost}, {"mean_price_usd_per_mwh", r.mean_price},
                               {"price_std_usd_per_mwh", r.price_std}, {"storage_profit_usd", r.storage_profit}});
  }
  std::ostringstream prices;
  prices << "capacity_share,model,scenario,hour,price_usd_per_mwh\n";
  for (const auto& p : result.prices)
    for (std::size_t h = 0; h < p.prices.size(); ++h)
      prices << p.capacity_share << ',' << p.model << ',' << p.scenario << ',' << h << ',' << p.prices[h] << '\n';
  write_text(dir / "sweep.csv", table.str());
  write_text(dir / "hourly_prices.csv", prices.str());
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  emit(summary);
  return 0;
}

int cmd_generate(const Options& o) {
  std::string text;
  if (o.kind == "prices") {
    PriceParams p;
    p.days = o.days;
    p.step_minutes = o.step;
    const auto series = synthetic_prices(p, o.seed);
    text = csv_text([&](std::ostream& os) { write_prices(os, series, o.start); });
  } else if (o.kind == "fleet") {
    FleetParams p;
    p.units = o.units;
    const auto fleet = synthetic_fleet(p, o.seed);
    text = csv_text([&](std::ostream& os) { write_fleet(os, fleet); });
  } else if (o.kind == "scenarios") {
    ScenarioParams p;
    p.count = o.count;
    const auto sc = synthetic_scenarios(p, o.seed);
    text = csv_text([&](std::ostream& os) { write_scenarios(os, sc); });
  } else if (o.kind == "storage") {
    const auto spec = make_storage_variant(o.variant.empty() ? "NLA" : o.variant);
    text = csv_text([&](std::ostream& os) { write_storage(os, spec); });
  } else {
    throw Error(ErrorKind::invalid_argument, "kind must be prices, fleet, scenarios or storage");
  }
  write_text(o.out, text);
  emit({{"ok", true}, {"kind", o.kind}, {"out", o.out}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SoC-segment storage market simulator"};
  app.require_subcommand(1);
  Options o;

  auto storage_opts = [&](CLI::App* c) {
    c->add_option("--storage", o.storage, "storage spec CSV");
    c->add_option("--variant", o.variant, "Lin, NLA, NLB, NLC, NLF or NLL (applied to --storage when given)");
  };
  auto value_opts = [&](CLI::App* c) {
    c->add_option("--points-per-mwh", o.points_per_mwh, "SoC grid density")->capture_default_str();
    c->add_option("--value-step", o.value_step, "valuation step in minutes, must divide the price step");
  };

  auto* validate = app.add_subcommand("validate", "parse and check input files");
  validate->add_option("--storage", o.storage);
  validate->add_option("--prices", o.prices);
  validate->add_option("--fleet", o.fleet);
  validate->add_option("--scenarios", o.scenarios);
  validate->add_option("--bids", o.bids);

  auto* value = app.add_subcommand("value", "write the value-to-go curve");
  storage_opts(value);
  value_opts(value);
  value->add_option("--prices", o.prices)->required();
  value->add_option("--out", o.out)->required();

  auto* bid = app.add_subcommand("bid", "write hourly SoC-segment bids");
  storage_opts(bid);
  value_opts(bid);
  bid->add_option("--prices", o.prices)->required();
  bid->add_option("--segments", o.segments, "bid segments k")->capture_default_str()->check(CLI::PositiveNumber);
  bid->add_option("--samples", o.samples, "SoC samples per segment")->capture_default_str()->check(CLI::PositiveNumber);
  bid->add_option("--averaging", o.averaging, "mean or start")->capture_default_str();
  bid->add_option("--out", o.out)->required();

  auto* backtest = app.add_subcommand("backtest", "price-taker arbitrage backtest");
  storage_opts(backtest);
  value_opts(backtest);
  backtest->add_option("--prices", o.prices)->required();
  backtest->add_option("--models", o.models, "Multi and/or RTD-k")->delimiter(',')->capture_default_str();
  backtest->add_option("--samples", o.samples)->capture_default_str()->check(CLI::PositiveNumber);
  backtest->add_option("--averaging", o.averaging)->capture_default_str();
  backtest->add_option("--e-init", o.e_init, "initial SoC in MWh (default empty)");
  backtest->add_option("--bins", o.bins, "SoC histogram bins")->capture_default_str()->check(CLI::PositiveNumber);
  backtest->add_flag("--trajectories", o.trajectories, "also write per-interval dispatch");
  backtest->add_option("--out-dir", o.out_dir)->required();

  auto* market = app.add_subcommand("market", "price-influencer capacity and segment sweep");
  market->add_option("--fleet", o.fleet)->required();
  market->add_option("--scenarios", o.scenarios)->required();
  market->add_option("--capacities", o.capacities, "storage MW as shares of peak demand")->delimiter(',');
  market->add_option("--segments", o.segment_counts, "bid segment counts")->delimiter(',');
  market->add_option("--grid-points", o.grid_points)->capture_default_str();
  market->add_option("--samples", o.samples)->capture_default_str()->check(CLI::PositiveNumber);
  market->add_option("--out-dir", o.out_dir)->required();

  auto* gen = app.add_subcommand("gen-synthetic", "write seeded synthetic inputs");
  gen->add_option("kind", o.kind, "prices, fleet, scenarios or storage")->required();
  gen->add_option("--seed", o.seed)->capture_default_str();
  gen->add_option("--days", o.days)->capture_default_str();
  gen->add_option("--step", o.step, "price step in minutes")->capture_default_str();
  gen->add_option("--start", o.start, "first timestamp")->capture_default_str();
  gen->add_option("--units", o.units)->capture_default_str();
  gen->add_option("--count", o.count, "number of scenarios")->capture_default_str();
  gen->add_option("--variant", o.variant, "storage variant for kind=storage");
  gen->add_option("--out", o.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what());
  }

  try {
    if (*validate) return cmd_validate(o);
    if (*value) return cmd_value(o);
    if (*bid) return cmd_bid(o);
    if (*backtest) return cmd_backtest(o);
    if (*market) return cmd_market(o);
    if (*gen) return cmd_generate(o);
  } catch (const Error& e) {
    return fail(to_string(e.kind()), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
