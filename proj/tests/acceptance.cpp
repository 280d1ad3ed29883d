// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Pass criterion numbers as arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "socmkt/benchmark.hpp"
#include "socmkt/clearing.hpp"
#include "socmkt/gridsim.hpp"
#include "socmkt/study.hpp"
#include "socmkt/synthetic.hpp"
#include "socmkt/valuation.hpp"

using namespace socmkt;

namespace {

// Pinned thresholds.
constexpr double kC1Seconds = 10.0;
constexpr std::size_t kC1Instances = 1000;
constexpr std::size_t kC1Levels = 40;  // enumeration levels per segment
constexpr double kC2Seconds = 30.0;
constexpr std::size_t kC2Instances = 100;
constexpr double kC2Tol = 1e-9;  // relative, floating-point summation order only
constexpr std::size_t kC3Series = 50;
constexpr std::size_t kC4Seeds = 10;
constexpr double kC4ModelSeconds = 60.0;
constexpr double kGridTol = 1e-3;  // relative DP grid tolerance for dominance
constexpr double kC5MinGapPts = 5.0;
constexpr std::size_t kC5Seeds = 10;
constexpr double kC6Seconds = 300.0;
constexpr std::size_t kC7Sequences = 10000;
constexpr std::size_t kC7Steps = 50;
constexpr double kFillTol = 1e-9;
constexpr double kBalanceTol = 1e-6;
constexpr std::size_t kC7Systems = 100;

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome criterion1() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> price(-20.0, 150.0);
  std::size_t bad = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < kC1Instances; ++i) {
    const StorageSpec spec = oracle::random_spec(rng, 1 + i % 5);
    const StorageState st = oracle::random_state(rng, spec);
    const BidCurve bids = oracle::random_bids(rng, spec);
    const double lambda = price(rng);
    const double greedy = bid_objective(bids, clear_pricetaker(spec, st, bids, lambda).dispatch, lambda);
    double brute = 0.0;
    oracle::enumerate_moves(spec, st, kC1Levels,
                            [&](const oracle::Move& m) { brute = std::max(brute, oracle::bid_value(bids, m, lambda)); });
    // One enumeration level per segment bounds the gap to the continuous optimum.
    double tol = 1e-9;
    for (std::size_t s = 0; s < spec.size(); ++s) {
      const auto& g = spec.segments[s];
      const double coef = std::max(std::abs(lambda - bids.segments[s].discharge), std::abs(lambda - bids.segments[s].charge));
      tol += coef * std::max(st.e_seg[s] * g.eta_d, (spec.width(s) - st.e_seg[s]) / g.eta_p) / kC1Levels;
    }
    worst = std::max(worst, std::abs(greedy - brute));
    if (greedy < brute - 1e-9 || greedy > brute + tol) ++bad;
  }
  const double secs = since(t0);
  return {bad == 0 && secs < kC1Seconds,
          fmt("%zu/%zu instances within grid resolution, max |greedy-brute| %.3g, %.2f s (limit %.0f s)",
              kC1Instances - bad, kC1Instances, worst, secs, kC1Seconds)};
}

Outcome criterion2() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2002);
  std::uniform_real_distribution<double> price(-20.0, 120.0);
  DpOptions opt;
  opt.rate_limit_arcs = false;  // the oracle walks grid arcs only
  std::size_t bad = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < kC2Instances; ++i) {
    const StorageSpec spec = oracle::random_spec(rng, 1 + i % 2);
    const SocGrid g{spec.e_min, spec.capacity() / 20.0, 21};
    std::vector<double> p(1 + i % 4);
    for (double& v : p) v = price(rng);
    const PriceSeries series{60.0, p};
    const double e0 = g.at(i % 21);
    const double dp = multi_period_dispatch(spec, series, e0, g, opt).objective;
    const double bf = brute_force_oracle(spec, series, e0, g).objective;
    const double err = std::abs(dp - bf) / std::max(1.0, std::abs(bf));
    worst = std::max(worst, err);
    if (err > kC2Tol) ++bad;
  }
  const double secs = since(t0);
  return {bad == 0 && secs < kC2Seconds, fmt("%zu/%zu instances match, max rel diff %.2g, %.2f s (limit %.0f s)",
                                             kC2Instances - bad, kC2Instances, worst, secs, kC2Seconds)};
}

Outcome criterion3() {
  const StorageSpec lin = oracle::linear_spec();
  const SocGrid g = build_grid(lin, 1000.0);
  const double q = q_lookup(backward_induction(lin, PriceSeries{60.0, {50.0}}, g), 0, 0.1);
  const bool example = std::abs(q - 27.0) < 1e-9;

  std::mt19937_64 rng(3003);
  std::uniform_real_distribution<double> price(0.0, 200.0);
  std::size_t bad = 0;
  for (std::size_t k = 0; k < kC3Series; ++k) {
    std::vector<double> p(96);
    for (double& v : p) v = price(rng);
    const ValueCurve c = backward_induction(lin, PriceSeries{60.0, p}, g);
    bool ok = true;
    for (std::size_t t = 0; t <= c.steps && ok; ++t) {
      const auto row = c.row(t);
      for (std::size_t i = 1; i < row.size() && ok; ++i) ok = row[i] <= row[i - 1] + 1e-12;
    }
    if (!ok) ++bad;
  }
  return {example && bad == 0,
          fmt("one-step q(0.1) = %.6f (expect 27); %zu/%zu random series monotone in e", q, kC3Series - bad, kC3Series)};
}

struct YearRuns {
  std::vector<BacktestRun> runs;  // Multi, RTD-5, RTD-1
};

std::map<std::string, std::vector<YearRuns>> g_year_cache;

const std::vector<YearRuns>& year_runs(const std::string& variant, std::size_t seeds) {
  auto& cache = g_year_cache[variant];
  if (cache.size() >= seeds) return cache;
  const StorageSpec spec = make_storage_variant(variant);
  const std::vector<MarketModel> models = {MarketModel::parse("Multi"), MarketModel::parse("RTD-5"),
                                           MarketModel::parse("RTD-1")};
  PriceTakerConfig cfg;
  for (std::size_t s = cache.size(); s < seeds; ++s) {
    PriceParams pp;  // 365 days at 5 minutes
    const PriceSeries prices = synthetic_prices(pp, 100 + s);
    cache.push_back(YearRuns{run_pricetaker_study(spec, prices, models, cfg)});
    const auto& r = cache.back().runs;
    std::printf("  [%s seed %zu] Multi %.1f (%.1fs)  RTD-5 %.1f %.1f%% (%.1fs)  RTD-1 %.1f %.1f%% (%.1fs)\n",
                variant.c_str(), 100 + s, r[0].report.profit, r[0].report.seconds, r[1].report.profit,
                r[1].report.ratio, r[1].report.seconds, r[2].report.profit, r[2].report.ratio, r[2].report.seconds);
    std::fflush(stdout);
  }
  return cache;
}

Outcome criterion4() {
  const auto& runs = year_runs("Lin", kC4Seeds);
  std::size_t dominated = 0;
  double sum5 = 0.0, sum1 = 0.0, slowest = 0.0, ratio5 = 0.0, ratio1 = 0.0;
  for (const auto& y : runs) {
    const double multi = y.runs[0].report.profit;
    if (y.runs[1].report.profit <= multi * (1.0 + kGridTol) && y.runs[2].report.profit <= multi * (1.0 + kGridTol))
      ++dominated;
    sum5 += y.runs[1].report.profit;
    sum1 += y.runs[2].report.profit;
    ratio5 += y.runs[1].report.ratio;
    ratio1 += y.runs[2].report.ratio;
    for (const auto& r : y.runs) slowest = std::max(slowest, r.report.seconds);
  }
  const double n = static_cast<double>(runs.size());
  const bool pass = dominated == runs.size() && sum5 > sum1 && slowest <= kC4ModelSeconds;
  return {pass, fmt("Lin, %zu seeds x 105120 intervals: Multi >= RTD-5, RTD-1 on %zu/%zu; mean RTD-5 %.1f (%.1f%%) "
                    "vs RTD-1 %.1f (%.1f%%); slowest model %.1f s (limit %.0f s)",
                    runs.size(), dominated, runs.size(), sum5 / n, ratio5 / n, sum1 / n, ratio1 / n, slowest,
                    kC4ModelSeconds)};
}

// Share of time spent between 20% and 60% SoC.
double mid_occupancy(const BacktestRun& run, const StorageSpec& spec) {
  const auto h = soc_histogram(run.soc, spec.e_min, spec.e_max(), 10);
  return h[2] + h[3] + h[4] + h[5];
}

Outcome criterion5() {
  const auto& runs = year_runs("NLA", kC5Seeds);
  const StorageSpec spec = make_storage_variant("NLA");
  double r5 = 0.0, r1 = 0.0, occ_multi = 0.0, occ5 = 0.0, occ1 = 0.0;
  for (const auto& y : runs) {
    r5 += y.runs[1].report.ratio;
    r1 += y.runs[2].report.ratio;
    occ_multi += mid_occupancy(y.runs[0], spec);
    occ5 += mid_occupancy(y.runs[1], spec);
    occ1 += mid_occupancy(y.runs[2], spec);
  }
  const double n = static_cast<double>(runs.size());
  r5 /= n, r1 /= n, occ_multi /= n, occ5 /= n, occ1 /= n;
  const bool pass = r5 - r1 >= kC5MinGapPts && occ_multi > occ5;
  return {pass, fmt("NLA, %zu seeds: RTD-5 ratio %.1f%% vs RTD-1 %.1f%% (gap %.1f pts, need >= %.0f); "
                    "time at 20-60%% SoC: Multi %.1f%%, RTD-5 %.1f%%, RTD-1 %.1f%%",
                    runs.size(), r5, r1, r5 - r1, kC5MinGapPts, 100 * occ_multi, 100 * occ5, 100 * occ1)};
}

Outcome criterion6() {
  const auto t0 = Clock::now();
  FleetParams fp;  // 10 units
  const auto fleet = synthetic_fleet(fp, 6006);
  ScenarioParams sp;  // 5 scenarios
  const auto scenarios = synthetic_scenarios(sp, 6006);
  SweepConfig cfg;  // capacities 0-20% of peak, segments {1, 2, 5, 10}
  const SweepResult res = run_priceinfluencer_study(fleet, scenarios, cfg);
  const double secs = since(t0);

  std::map<double, std::vector<const SweepRow*>> by_cap;
  for (const auto& r : res.rows)
    if (r.model != "Multi") by_cap[r.capacity_share].push_back(&r);
  bool cost_ok = true, std_ok = true;
  std::ostringstream rows;
  for (const auto& [share, list] : by_cap) {
    if (share <= 0.0) continue;
    rows << "\n    cap " << share * 100 << "%:";
    for (std::size_t j = 0; j < list.size(); ++j) {
      rows << ' ' << list[j]->model << " cost " << fmt("%.6f", list[j]->normalized_cost) << " std "
           << fmt("%.2f", list[j]->price_std) << ';';
      if (j > 0 && list[j]->mean_cost > list[j - 1]->mean_cost) cost_ok = false;
    }
    if (!(list.back()->price_std < list.front()->price_std)) std_ok = false;
  }
  const bool pass = cost_ok && std_ok && secs <= kC6Seconds;
  return {pass, fmt("cost non-increasing in segments: %s; price std RTD-10 < RTD-1: %s; %.1f s (limit %.0f s)",
                    cost_ok ? "yes" : "no", std_ok ? "yes" : "no", secs, kC6Seconds) +
                    rows.str()};
}

Outcome criterion7() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(7007);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t bad_seq = 0;
  for (std::size_t k = 0; k < kC7Sequences; ++k) {
    const StorageSpec spec = oracle::random_spec(rng, 1 + k % 5);
    StorageState st = oracle::random_state(rng, spec);
    bool ok = true;
    for (std::size_t t = 0; t < kC7Steps && ok; ++t) {
      const Envelope env = feasible_envelope(spec, st);
      const double r = u(rng);
      const Dispatch m = r < 0.45 ? plan_discharge(spec, st, env.max_discharge * u(rng))
                         : r < 0.9 ? plan_charge(spec, st, env.max_charge * u(rng))
                                   : idle_dispatch(spec);
      const StorageState next = apply_dispatch(spec, st, m);
      double expect = soc_total(spec, st);
      for (std::size_t s = 0; s < spec.size(); ++s) {
        const auto& g = spec.segments[s];
        expect += -m.d_seg[s] / g.eta_d + m.p_seg[s] * g.eta_p;
        const double want = st.e_seg[s] - m.d_seg[s] / g.eta_d + m.p_seg[s] * g.eta_p;
        ok = ok && std::abs(next.e_seg[s] - want) <= kFillTol && next.e_seg[s] >= -kFillTol &&
             next.e_seg[s] <= spec.width(s) + kFillTol;
      }
      const double soc = soc_total(spec, next);
      ok = ok && std::abs(soc - expect) <= kFillTol && soc >= spec.e_min - kFillTol && soc <= spec.e_max() + kFillTol &&
           oracle::fill_order_ok(spec, next.e_seg);
      st = next;
    }
    if (!ok) ++bad_seq;
  }

  double worst_balance = 0.0;
  std::size_t uc_bad = 0, hours = 0;
  std::string first_problem;
  for (std::size_t k = 0; k < kC7Systems; ++k) {
    ScenarioParams sp;
    sp.count = 1;
    const ScenarioData sc = synthetic_scenarios(sp, 70000 + k).front();
    const double peak = *std::max_element(sc.demand.begin(), sc.demand.end());
    // Unit commitment presumes a serviceable day, so the fleet is sized from the peak.
    FleetParams fp;
    fp.units = 10 + k % 31;
    fp.total_capacity_mw = peak * (1.15 + 0.35 * u(rng));
    const auto fleet = synthetic_fleet(fp, 70000 + k);
    const CommitmentSchedule uc = unit_commitment(fleet, sc);
    const auto problems = check_commitment(fleet, sc, uc);
    if (!problems.empty()) {
      ++uc_bad;
      if (first_problem.empty()) first_problem = problems.front();
    }
    SweepConfig cfg;
    const StorageSpec phys = influencer_storage((0.02 + 0.18 * u(rng)) * peak, cfg);
    const SocGrid grid{phys.e_min, phys.capacity() / 200.0, 201};
    std::vector<SystemDay> days;
    days.push_back(economic_dispatch_multi(fleet, uc, sc, phys, 0.0, grid));
    const StorageSpec market = resegment(phys, 1 + k % 5);
    HourlyBidBuilder builder(market, grid, SamplingPlan{}, BidTiming{}, sc.hours());
    backward_induction(phys, PriceSeries{60.0, uc.price_da}, grid,
                       [&](std::size_t t, std::span<const double> row) { builder(t, row); });
    auto bids = builder.finish();
    for (auto& b : bids) b = enforce_monotone(std::move(b));
    days.push_back(simulate_realtime_day(fleet, uc, sc, phys, market, bids, 0.0));
    for (const auto& day : days)
      for (std::size_t t = 0; t < sc.hours(); ++t) {
        const auto& h = day.hours[t];
        double served = h.thermal.wind + h.storage;
        for (double g : h.thermal.output) served += g;
        worst_balance = std::max(worst_balance, std::abs(served - sc.demand[t]));
        ++hours;
      }
  }
  const bool pass = bad_seq == 0 && worst_balance <= kBalanceTol && uc_bad == 0;
  std::string detail = fmt("%zu/%zu apply sequences clean; worst balance %.2g MW over %zu hours; UC checker clean on "
                           "%zu/%zu systems; %.1f s",
                           kC7Sequences - bad_seq, kC7Sequences, worst_balance, hours, kC7Systems - uc_bad, kC7Systems,
                           since(t0));
  if (!first_problem.empty()) detail += " (first: " + first_problem + ")";
  return {pass, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                          criterion5, criterion6, criterion7};
  std::set<int> pick;
  for (int i = 1; i < argc; ++i) pick.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!pick.empty() && !pick.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", id, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
