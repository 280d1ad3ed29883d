#include "socmkt/io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "socmkt/error.hpp"

namespace socmkt {

namespace {

std::string trim(std::string s) {
  const auto keep = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), keep));
  s.erase(std::find_if(s.rbegin(), s.rend(), keep).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& msg) {
  std::ostringstream os;
  os << "line " << line << ": " << msg;
  throw Error(ErrorKind::parse, os.str());
}

double to_double(const std::string& s, std::size_t line, const char* field) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (!s.empty() && *b == '+') ++b;
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || !std::isfinite(v))
    parse_fail(line, std::string("bad number '") + s + "' in " + field);
  return v;
}

long long to_int(const std::string& s, std::size_t line, const char* field) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    parse_fail(line, std::string("bad integer '") + s + "' in " + field);
  return v;
}

// Reads non-empty lines, numbering from 1.
struct LineReader {
  std::istream& in;
  std::size_t number = 0;

  bool next(std::string& line) {
    while (std::getline(in, line)) {
      ++number;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!trim(line).empty()) return true;
    }
    return false;
  }
};

void expect_header(LineReader& reader, const std::vector<std::string>& want) {
  std::string line;
  if (!reader.next(line)) parse_fail(reader.number, "missing header");
  if (split(line) != want) {
    std::string joined;
    for (const auto& w : want) joined += (joined.empty() ? "" : ",") + w;
    parse_fail(reader.number, "expected header '" + joined + "'");
  }
}

std::string number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

StorageSpec parse_storage(std::istream& in) {
  LineReader reader{in};
  std::string line;
  if (!reader.next(line)) parse_fail(1, "empty storage file");
  const auto meta = split(line);
  if (meta.empty() || meta[0] != "meta") parse_fail(reader.number, "first line must be the meta row");
  StorageSpec spec;
  bool has_min = false;
  for (std::size_t k = 1; k < meta.size(); ++k) {
    const auto eq = meta[k].find('=');
    if (eq == std::string::npos) parse_fail(reader.number, "meta entries are key=value");
    const std::string key = trim(meta[k].substr(0, eq));
    const std::string val = trim(meta[k].substr(eq + 1));
    if (key == "e_min_mwh") {
      spec.e_min = to_double(val, reader.number, "e_min_mwh");
      has_min = true;
    } else if (key == "step_minutes") {
      spec.step_minutes = to_double(val, reader.number, "step_minutes");
    } else if (key == "crossing") {
      if (val == "mixture") {
        spec.crossing = CrossingRule::mixture;
      } else if (val == "start_segment_clamp") {
        spec.crossing = CrossingRule::start_segment_clamp;
      } else {
        parse_fail(reader.number, "unknown crossing rule '" + val + "'");
      }
    } else {
      parse_fail(reader.number, "unknown meta key '" + key + "'");
    }
  }
  if (!has_min) parse_fail(reader.number, "meta row needs e_min_mwh");
  if (!(spec.step_minutes > 0.0)) parse_fail(reader.number, "step_minutes must be positive");
  expect_header(reader, {"segment", "e_end_mwh", "cost_usd_per_mwh", "d_rating_mw", "p_rating_mw", "eta_d", "eta_p"});
  const double hours = spec.step_minutes / 60.0;
  while (reader.next(line)) {
    const auto f = split(line);
    if (f.size() != 7) parse_fail(reader.number, "expected 7 fields");
    if (to_int(f[0], reader.number, "segment") != static_cast<long long>(spec.segments.size() + 1))
      parse_fail(reader.number, "segments must be numbered 1, 2, ... in order");
    SegmentSpec s;
    s.e_end = to_double(f[1], reader.number, "e_end_mwh");
    s.cost = to_double(f[2], reader.number, "cost_usd_per_mwh");
    s.d_rating = to_double(f[3], reader.number, "d_rating_mw") * hours;
    s.p_rating = to_double(f[4], reader.number, "p_rating_mw") * hours;
    s.eta_d = to_double(f[5], reader.number, "eta_d");
    s.eta_p = to_double(f[6], reader.number, "eta_p");
    spec.segments.push_back(s);
  }
  return validate_spec(std::move(spec));
}

void write_storage(std::ostream& out, const StorageSpec& spec) {
  const double hours = spec.step_minutes / 60.0;
  out << "meta,e_min_mwh=" << number(spec.e_min) << ",step_minutes=" << number(spec.step_minutes);
  if (spec.crossing == CrossingRule::start_segment_clamp) out << ",crossing=start_segment_clamp";
  out << "\nsegment,e_end_mwh,cost_usd_per_mwh,d_rating_mw,p_rating_mw,eta_d,eta_p\n";
  for (std::size_t s = 0; s < spec.size(); ++s) {
    const auto& g = spec.segments[s];
    out << s + 1 << ',' << number(g.e_end) << ',' << number(g.cost) << ',' << number(g.d_rating / hours) << ','
        << number(g.p_rating / hours) << ',' << number(g.eta_d) << ',' << number(g.eta_p) << '\n';
  }
}

long long parse_timestamp(const std::string& text) {
  const std::string s = trim(text);
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  char sep = 0;
  int consumed = 0;
  const int got = std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d:%2d%n", &y, &mo, &d, &sep, &h, &mi, &consumed);
  if (got < 6 || (sep != 'T' && sep != ' ')) throw Error(ErrorKind::parse, "bad timestamp '" + s + "'");
  std::size_t pos = static_cast<std::size_t>(consumed);
  if (pos < s.size() && s[pos] == ':') {
    int used = 0;
    if (std::sscanf(s.c_str() + pos, ":%2d%n", &sec, &used) != 1) throw Error(ErrorKind::parse, "bad timestamp '" + s + "'");
    pos += static_cast<std::size_t>(used);
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    }
  }
  long long offset = 0;
  if (pos < s.size()) {
    if (s[pos] == 'Z' && pos + 1 == s.size()) {
      pos = s.size();
    } else if (s[pos] == '+' || s[pos] == '-') {
      int oh = 0, om = 0;
      if (std::sscanf(s.c_str() + pos + 1, "%2d:%2d", &oh, &om) != 2) throw Error(ErrorKind::parse, "bad timestamp '" + s + "'");
      offset = (s[pos] == '+' ? 1 : -1) * (oh * 3600LL + om * 60LL);
      pos = s.size();
    }
  }
  if (pos != s.size()) throw Error(ErrorKind::parse, "bad timestamp '" + s + "'");
  using namespace std::chrono;
  const year_month_day date{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!date.ok() || h > 23 || mi > 59 || sec > 60) throw Error(ErrorKind::parse, "bad timestamp '" + s + "'");
  const long long days = sys_days{date}.time_since_epoch().count();
  return days * 86400LL + h * 3600LL + mi * 60LL + sec - offset;
}

std::string format_timestamp(long long seconds) {
  using namespace std::chrono;
  long long days = seconds / 86400;
  long long rem = seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  const year_month_day date{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lld", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()), rem / 3600,
                (rem / 60) % 60, rem % 60);
  return buf;
}

PriceSeries parse_prices(std::istream& in) {
  LineReader reader{in};
  expect_header(reader, {"timestamp_iso8601", "price_usd_per_mwh"});
  PriceSeries series;
  std::string line;
  long long prev = 0;
  long long step = 0;
  while (reader.next(line)) {
    const auto f = split(line);
    if (f.size() != 2) parse_fail(reader.number, "expected 2 fields");
    long long ts = 0;
    try {
      ts = parse_timestamp(f[0]);
    } catch (const Error& e) {
      parse_fail(reader.number, e.what());
    }
    if (series.prices.size() == 1) {
      step = ts - prev;
      if (step <= 0) parse_fail(reader.number, "timestamps must strictly increase");
    } else if (series.prices.size() > 1 && ts - prev != step) {
      parse_fail(reader.number, "timestamps must be uniformly spaced");
    }
    prev = ts;
    series.prices.push_back(to_double(f[1], reader.number, "price_usd_per_mwh"));
  }
  if (series.prices.empty()) parse_fail(reader.number, "no prices");
  series.step_minutes = series.prices.size() > 1 ? static_cast<double>(step) / 60.0 : 60.0;
  validate_prices(series);
  return series;
}

void write_prices(std::ostream& out, const PriceSeries& series, const std::string& start_iso) {
  const long long start = parse_timestamp(start_iso);
  const auto step = static_cast<long long>(std::llround(series.step_minutes * 60.0));
  out << "timestamp_iso8601,price_usd_per_mwh\n";
  for (std::size_t t = 0; t < series.size(); ++t)
    out << format_timestamp(start + static_cast<long long>(t) * step) << ',' << number(series.prices[t]) << '\n';
}

std::vector<BidCurve> parse_bids(std::istream& in) {
  LineReader reader{in};
  expect_header(reader, {"hour", "segment", "e_lo_mwh", "e_hi_mwh", "discharge_bid", "charge_bid"});
  std::vector<BidCurve> bids;
  std::string line;
  while (reader.next(line)) {
    const auto f = split(line);
    if (f.size() != 6) parse_fail(reader.number, "expected 6 fields");
    const auto hour = to_int(f[0], reader.number, "hour");
    const auto seg = to_int(f[1], reader.number, "segment");
    if (bids.empty() || static_cast<long long>(bids.back().hour) != hour) {
      if (hour != static_cast<long long>(bids.size())) parse_fail(reader.number, "hours must run 0, 1, ... in order");
      bids.push_back(BidCurve{static_cast<std::size_t>(hour), {}});
    }
    if (seg != static_cast<long long>(bids.back().segments.size() + 1))
      parse_fail(reader.number, "segments must be numbered 1, 2, ... within each hour");
    bids.back().segments.push_back(SegmentBid{to_double(f[2], reader.number, "e_lo_mwh"),
                                              to_double(f[3], reader.number, "e_hi_mwh"),
                                              to_double(f[4], reader.number, "discharge_bid"),
                                              to_double(f[5], reader.number, "charge_bid")});
  }
  return bids;
}

void write_bids(std::ostream& out, const std::vector<BidCurve>& bids) {
  out << "hour,segment,e_lo_mwh,e_hi_mwh,discharge_bid,charge_bid\n";
  for (const auto& curve : bids)
    for (std::size_t s = 0; s < curve.segments.size(); ++s) {
      const auto& b = curve.segments[s];
      out << curve.hour << ',' << s + 1 << ',' << number(b.e_lo) << ',' << number(b.e_hi) << ','
          << number(b.discharge) << ',' << number(b.charge) << '\n';
    }
}

std::vector<GeneratorSpec> parse_fleet(std::istream& in) {
  LineReader reader{in};
  expect_header(reader, {"gen_id", "c_lin", "c_quad", "c_noload", "c_start", "g_min_mw", "g_max_mw", "t_up_h", "t_dn_h"});
  std::vector<GeneratorSpec> fleet;
  std::string line;
  while (reader.next(line)) {
    const auto f = split(line);
    if (f.size() != 9) parse_fail(reader.number, "expected 9 fields");
    GeneratorSpec g;
    g.id = f[0];
    g.c_lin = to_double(f[1], reader.number, "c_lin");
    g.c_quad = to_double(f[2], reader.number, "c_quad");
    g.c_noload = to_double(f[3], reader.number, "c_noload");
    g.c_start = to_double(f[4], reader.number, "c_start");
    g.g_min = to_double(f[5], reader.number, "g_min_mw");
    g.g_max = to_double(f[6], reader.number, "g_max_mw");
    g.t_up = static_cast<int>(to_int(f[7], reader.number, "t_up_h"));
    g.t_dn = static_cast<int>(to_int(f[8], reader.number, "t_dn_h"));
    try {
      validate_generator(g);
    } catch (const Error& e) {
      parse_fail(reader.number, e.what());
    }
    fleet.push_back(std::move(g));
  }
  if (fleet.empty()) parse_fail(reader.number, "no generators");
  return fleet;
}

void write_fleet(std::ostream& out, const std::vector<GeneratorSpec>& fleet) {
  out << "gen_id,c_lin,c_quad,c_noload,c_start,g_min_mw,g_max_mw,t_up_h,t_dn_h\n";
  for (const auto& g : fleet)
    out << g.id << ',' << number(g.c_lin) << ',' << number(g.c_quad) << ',' << number(g.c_noload) << ','
        << number(g.c_start) << ',' << number(g.g_min) << ',' << number(g.g_max) << ',' << g.t_up << ','
        << g.t_dn << '\n';
}

std::vector<ScenarioData> parse_scenarios(std::istream& in) {
  LineReader reader{in};
  std::string line;
  if (!reader.next(line)) parse_fail(1, "missing header");
  const auto header = split(line);
  const bool keyed = header == std::vector<std::string>{"scenario", "hour", "demand_mw", "wind_mw"};
  if (!keyed && header != std::vector<std::string>{"hour", "demand_mw", "wind_mw"})
    parse_fail(reader.number, "expected header '[scenario,]hour,demand_mw,wind_mw'");
  std::vector<ScenarioData> out;
  std::map<std::string, std::size_t> index;
  while (reader.next(line)) {
    const auto f = split(line);
    if (f.size() != header.size()) parse_fail(reader.number, "wrong field count");
    const std::string id = keyed ? f[0] : "0";
    auto [it, fresh] = index.try_emplace(id, out.size());
    if (fresh) out.push_back(ScenarioData{id, {}, {}});
    auto& sc = out[it->second];
    const std::size_t k = keyed ? 1 : 0;
    if (to_int(f[k], reader.number, "hour") != static_cast<long long>(sc.demand.size()))
      parse_fail(reader.number, "hours must run 0, 1, ... in order within a scenario");
    sc.demand.push_back(to_double(f[k + 1], reader.number, "demand_mw"));
    sc.wind.push_back(to_double(f[k + 2], reader.number, "wind_mw"));
  }
  if (out.empty()) parse_fail(reader.number, "no scenario rows");
  for (const auto& sc : out) validate_scenario(sc);
  return out;
}

void write_scenarios(std::ostream& out, const std::vector<ScenarioData>& scenarios) {
  out << "scenario,hour,demand_mw,wind_mw\n";
  for (const auto& sc : scenarios)
    for (std::size_t t = 0; t < sc.hours(); ++t)
      out << sc.id << ',' << t << ',' << number(sc.demand[t]) << ',' << number(sc.wind[t]) << '\n';
}

void write_value_curve(std::ostream& out, const ValueCurve& curve) {
  out << "t,e_mwh,q_usd_per_mwh\n";
  for (std::size_t t = 0; t <= curve.steps; ++t) {
    const auto row = curve.row(t);
    for (std::size_t i = 0; i < curve.grid.count; ++i)
      out << t << ',' << number(curve.grid.at(i)) << ',' << number(row[i]) << '\n';
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

}  // namespace socmkt
