#pragma once

// CSV readers and writers for every file the CLI consumes or emits.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "socmkt/bidding.hpp"
#include "socmkt/gridsim.hpp"
#include "socmkt/storage_model.hpp"
#include "socmkt/thermal.hpp"
#include "socmkt/valuation.hpp"

namespace socmkt {

/// Storage spec: a `meta,e_min_mwh=<x>,step_minutes=<y>` line, then
/// `segment,e_end_mwh,cost_usd_per_mwh,d_rating_mw,p_rating_mw,eta_d,eta_p`
/// rows. Ratings in MW are converted to MWh per dispatch step.
StorageSpec parse_storage(std::istream& in);
void write_storage(std::ostream& out, const StorageSpec& spec);

/// `timestamp_iso8601,price_usd_per_mwh` with a uniform step.
PriceSeries parse_prices(std::istream& in);
void write_prices(std::ostream& out, const PriceSeries& series, const std::string& start_iso);

/// Seconds since 1970-01-01T00:00:00Z for `YYYY-MM-DD[T ]HH:MM[:SS][Z|+hh:mm]`.
long long parse_timestamp(const std::string& text);
std::string format_timestamp(long long seconds);

std::vector<BidCurve> parse_bids(std::istream& in);
void write_bids(std::ostream& out, const std::vector<BidCurve>& bids);

std::vector<GeneratorSpec> parse_fleet(std::istream& in);
void write_fleet(std::ostream& out, const std::vector<GeneratorSpec>& fleet);

/// `[scenario,]hour,demand_mw,wind_mw`; without the scenario column every row
/// belongs to one scenario.
std::vector<ScenarioData> parse_scenarios(std::istream& in);
void write_scenarios(std::ostream& out, const std::vector<ScenarioData>& scenarios);

/// Long format `t,e_mwh,q_usd_per_mwh`.
void write_value_curve(std::ostream& out, const ValueCurve& curve);

/// Opens a file and runs a parser, tagging errors with the path.
template <class Parser>
auto read_file(const std::filesystem::path& path, Parser&& parse) -> decltype(parse(std::declval<std::istream&>()));

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace socmkt

#include <fstream>
#include <sstream>

#include "socmkt/error.hpp"

namespace socmkt {

template <class Parser>
auto read_file(const std::filesystem::path& path, Parser&& parse) -> decltype(parse(std::declval<std::istream&>())) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  try {
    return parse(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace socmkt
