#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "socmkt/error.hpp"
#include "socmkt/storage_model.hpp"
#include "socmkt/study.hpp"

using namespace socmkt;

namespace {

void require_valid(const StorageSpec& spec, const StorageState& state) {
  REQUIRE(state.e_seg.size() == spec.size());
  for (std::size_t s = 0; s < spec.size(); ++s) {
    REQUIRE(state.e_seg[s] >= -kFillTolerance);
    REQUIRE(state.e_seg[s] <= spec.width(s) + kFillTolerance);
  }
  REQUIRE(oracle::fill_order_ok(spec, state.e_seg));
}

double stored_delta(const StorageSpec& spec, const Dispatch& d) {
  double v = 0.0;
  for (std::size_t s = 0; s < spec.size(); ++s)
    v += d.p_seg[s] * spec.segments[s].eta_p - d.d_seg[s] / spec.segments[s].eta_d;
  return v;
}

}  // namespace

TEST_CASE("validate_spec accepts the linear device and names bad segments") {
  CHECK_NOTHROW(oracle::linear_spec());

  StorageSpec flat;
  flat.segments = {{0.5, 0, 0.25, 0.25, 0.9, 0.9}, {0.5, 0, 0.25, 0.25, 0.9, 0.9}};
  try {
    validate_spec(flat);
    FAIL("expected invalid_spec");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_spec);
    CHECK(std::string(e.what()).find("segment 2") != std::string::npos);
  }

  StorageSpec hot;
  hot.segments = {{1.0, 0, 0.25, 0.25, 1.2, 0.9}};
  CHECK_THROWS_AS(validate_spec(hot), Error);
  CHECK_THROWS_AS(validate_spec(StorageSpec{}), Error);
}

TEST_CASE("soc_total sums segments above E_0") {
  const StorageSpec five = oracle::equal_segments(5, 1.0, 0.25, 0.9, 20.0);
  CHECK(soc_total(five, state_at(five, 1.0)) == doctest::Approx(1.0));
  CHECK(soc_total(five, empty_state(five)) == doctest::Approx(0.0));
  StorageState two_full{{0.2, 0.2, 0.0, 0.0, 0.0}};
  CHECK(soc_total(five, two_full) == doctest::Approx(0.4));
}

TEST_CASE("state_at fills bottom-up and segment_at uses upper-closed segments") {
  const StorageSpec five = oracle::equal_segments(5, 1.0, 0.25, 0.9, 20.0);
  const StorageState st = state_at(five, 0.5);
  CHECK(st.e_seg[0] == doctest::Approx(0.2));
  CHECK(st.e_seg[1] == doctest::Approx(0.2));
  CHECK(st.e_seg[2] == doctest::Approx(0.1));
  CHECK(st.e_seg[3] == 0.0);
  CHECK(segment_at(five, 0.0) == 0);
  CHECK(segment_at(five, 0.2) == 0);
  CHECK(segment_at(five, 0.2000001) == 1);
  CHECK(segment_at(five, 1.0) == 4);
  CHECK_THROWS_AS(state_at(five, 1.5), Error);
}

TEST_CASE("feasible_envelope examples agree with grid enumeration") {
  const StorageSpec lin = oracle::linear_spec();
  CHECK(feasible_envelope(lin, state_at(lin, 1.0)).max_discharge == doctest::Approx(0.25));
  CHECK(feasible_envelope(lin, state_at(lin, 0.1)).max_discharge == doctest::Approx(0.09));
  CHECK(oracle::brute_max(lin, state_at(lin, 0.1), 1000, true) == doctest::Approx(0.09).epsilon(1e-3));

  StorageSpec two;
  two.segments = {{0.5, 0, 0.25, 0.25, 1.0, 1.0}, {1.0, 0, 0.125, 0.125, 1.0, 1.0}};
  two = validate_spec(two);
  const StorageState full = state_at(two, 1.0);
  const double env = feasible_envelope(two, full).max_discharge;
  const double brute = oracle::brute_max(two, full, 400, true);
  CHECK(env == doctest::Approx(0.125));
  CHECK(brute <= env + 1e-12);
  CHECK(brute >= env - 0.5 / 400);

  // Top segment only partly full: the leftover budget reaches the lower one.
  const StorageState part = state_at(two, 0.55);
  const double env2 = feasible_envelope(two, part).max_discharge;
  CHECK(env2 == doctest::Approx(0.05 + (1.0 - 0.05 / 0.125) * 0.25));
  CHECK(oracle::brute_max(two, part, 400, true) == doctest::Approx(env2).epsilon(0.01));
}

TEST_CASE("feasible_envelope matches enumeration on random specs") {
  std::mt19937_64 rng(11);
  const std::size_t n = 60;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t S = 1 + static_cast<std::size_t>(trial % 3);
    const StorageSpec spec = oracle::random_spec(rng, S);
    const StorageState st = oracle::random_state(rng, spec);
    const Envelope env = feasible_envelope(spec, st);
    double slack_d = 0.0;
    double slack_p = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      slack_d = std::max(slack_d, st.e_seg[s] * spec.segments[s].eta_d / n);
      slack_p = std::max(slack_p, (spec.width(s) - st.e_seg[s]) / spec.segments[s].eta_p / n);
    }
    const double bd = oracle::brute_max(spec, st, n, true);
    const double bp = oracle::brute_max(spec, st, n, false);
    CHECK(bd <= env.max_discharge + 1e-9);
    CHECK(bd >= env.max_discharge - slack_d - 1e-9);
    CHECK(bp <= env.max_charge + 1e-9);
    CHECK(bp >= env.max_charge - slack_p - 1e-9);
  }
}

TEST_CASE("apply_dispatch examples") {
  const StorageSpec lin = oracle::linear_spec();
  const StorageState half = state_at(lin, 0.5);
  const StorageState up = apply_dispatch(lin, half, plan_charge(lin, half, 0.25));
  CHECK(soc_total(lin, up) == doctest::Approx(0.5 + 0.25 * 0.9));
  CHECK(soc_total(lin, up) == doctest::Approx(0.725));

  const StorageState same = apply_dispatch(lin, half, idle_dispatch(lin));
  CHECK(same.e_seg == half.e_seg);

  const StorageSpec five = oracle::equal_segments(5, 1.0, 0.25, 0.9, 20.0);
  const StorageState at08 = state_at(five, 0.8);
  const Dispatch d = plan_discharge(five, at08, 0.18);
  CHECK(d.d_seg[3] == doctest::Approx(0.18));
  const StorageState after = apply_dispatch(five, at08, d);
  CHECK(after.e_seg[3] == 0.0);
  CHECK(soc_total(five, after) == doctest::Approx(0.6));
}

TEST_CASE("apply_dispatch rejects infeasible dispatches") {
  const StorageSpec five = oracle::equal_segments(5, 1.0, 0.25, 0.9, 20.0);
  const StorageState st = state_at(five, 0.7);

  Dispatch wrong_order = idle_dispatch(five);
  wrong_order.d_seg[1] = 0.05;  // below the partly full segment 4
  wrong_order.d = 0.05;
  CHECK_THROWS_AS(apply_dispatch(five, st, wrong_order), Error);

  Dispatch too_fast = idle_dispatch(five);
  too_fast.d_seg[3] = 0.09;
  too_fast.d_seg[2] = 0.17;  // 0.26 / 0.25 > 1
  too_fast.d = 0.26;
  CHECK_THROWS_AS(apply_dispatch(five, st, too_fast), Error);

  Dispatch both = plan_charge(five, st, 0.1);
  both.d_seg[3] = 0.01;
  both.d = 0.01;
  CHECK_THROWS_AS(apply_dispatch(five, st, both), Error);

  CHECK_THROWS_AS(plan_discharge(five, st, 0.3), Error);
}

TEST_CASE("start_segment_clamp caps the whole step at the starting rating") {
  StorageSpec two;
  two.segments = {{0.5, 0, 0.25, 0.25, 1.0, 1.0}, {1.0, 0, 0.125, 0.125, 1.0, 1.0}};
  two.crossing = CrossingRule::start_segment_clamp;
  two = validate_spec(two);
  CHECK(feasible_envelope(two, state_at(two, 0.55)).max_discharge == doctest::Approx(0.125));
  CHECK(feasible_envelope(two, state_at(two, 0.45)).max_charge == doctest::Approx(0.25));
}

TEST_CASE("project_dispatch examples") {
  const StorageSpec nla = nonlinear_template();
  const StorageState st = state_at(nla, 0.2);
  const Dispatch proj = project_dispatch(nla, st, 0.0, 0.25);
  CHECK(proj.d == doctest::Approx(0.175));
  // Grid search over feasible discharges.
  const double cap = oracle::brute_max(nla, st, 20000, true);
  double best = 0.0;
  double best_err = 1e9;
  for (int i = 0; i <= 3000; ++i) {
    const double d = 0.3 * i / 3000.0;
    if (d > cap + 1e-12) break;
    const double err = (d - 0.25) * (d - 0.25);
    if (err < best_err) best_err = err, best = d;
  }
  CHECK(proj.d == doctest::Approx(best).epsilon(1e-3));

  const StorageSpec lin = oracle::linear_spec();
  const Dispatch inside = project_dispatch(lin, state_at(lin, 0.5), 0.0, 0.1);
  CHECK(inside.d == doctest::Approx(0.1));
  CHECK(inside.p == 0.0);
}

TEST_CASE("project_dispatch agrees with a grid search over one-sided candidates") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> inst(0.0, 0.4);
  for (int trial = 0; trial < 200; ++trial) {
    const StorageSpec spec = oracle::random_spec(rng, 1 + trial % 2);
    const StorageState st = oracle::random_state(rng, spec);
    const double p_hat = trial % 4 == 0 ? 0.0 : inst(rng);
    const double d_hat = trial % 4 == 1 ? 0.0 : inst(rng);
    const double max_p = oracle::brute_max(spec, st, 200, false);
    const double max_d = oracle::brute_max(spec, st, 200, true);
    double best_err = p_hat * p_hat + d_hat * d_hat;
    for (int i = 0; i <= 2000; ++i) {
      const double x = 0.5 * i / 2000.0;
      if (x <= max_p) best_err = std::min(best_err, (x - p_hat) * (x - p_hat) + d_hat * d_hat);
      if (x <= max_d) best_err = std::min(best_err, p_hat * p_hat + (x - d_hat) * (x - d_hat));
    }
    const Dispatch proj = project_dispatch(spec, st, p_hat, d_hat);
    const double err = (proj.p - p_hat) * (proj.p - p_hat) + (proj.d - d_hat) * (proj.d - d_hat);
    CHECK(err <= best_err + 1e-9);
    CHECK(proj.p * proj.d == 0.0);
    CHECK_NOTHROW(apply_dispatch(spec, st, proj));
  }
}

TEST_CASE("project_dispatch is idempotent") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> inst(0.0, 0.5);
  for (int trial = 0; trial < 500; ++trial) {
    const StorageSpec spec = oracle::random_spec(rng, 1 + trial % 5);
    const StorageState st = oracle::random_state(rng, spec);
    const Dispatch a = project_dispatch(spec, st, inst(rng), inst(rng));
    const Dispatch b = project_dispatch(spec, st, a.p, a.d);
    CHECK(b.p == doctest::Approx(a.p).epsilon(1e-12));
    CHECK(b.d == doctest::Approx(a.d).epsilon(1e-12));
  }
}

TEST_CASE("random dispatch sequences keep bounds, fill order and energy balance") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int run = 0; run < 200; ++run) {
    const StorageSpec spec = oracle::random_spec(rng, 1 + run % 5);
    StorageState st = oracle::random_state(rng, spec);
    for (int step = 0; step < 50; ++step) {
      const Envelope env = feasible_envelope(spec, st);
      Dispatch d = idle_dispatch(spec);
      const double r = u(rng);
      if (r < 0.4)
        d = plan_discharge(spec, st, env.max_discharge * (r < 0.1 ? 1.0 : u(rng)));
      else if (r < 0.8)
        d = plan_charge(spec, st, env.max_charge * (r < 0.5 ? 1.0 : u(rng)));
      else if (auto to = dispatch_to_soc(spec, st, spec.e_min + u(rng) * spec.capacity()))
        d = *to;
      const double before = soc_total(spec, st);
      st = apply_dispatch(spec, st, d);
      require_valid(spec, st);
      CHECK(soc_total(spec, st) - before == doctest::Approx(stored_delta(spec, d)).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("envelope is monotone in SoC when ratings favour it") {
  // Non-decreasing discharge ratings and non-increasing charge ratings in SoC.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    StorageSpec spec = oracle::random_spec(rng, 1 + trial % 4);
    std::vector<double> dr, pr;
    for (const auto& seg : spec.segments) dr.push_back(seg.d_rating), pr.push_back(seg.p_rating);
    std::sort(dr.begin(), dr.end());
    std::sort(pr.rbegin(), pr.rend());
    for (std::size_t s = 0; s < spec.size(); ++s) spec.segments[s].d_rating = dr[s], spec.segments[s].p_rating = pr[s];
    double prev_d = -1.0;
    double prev_p = 1e9;
    for (int i = 0; i <= 200; ++i) {
      const Envelope env = feasible_envelope(spec, state_at(spec, spec.e_min + spec.capacity() * i / 200.0));
      CHECK(env.max_discharge >= prev_d - 1e-12);
      CHECK(env.max_charge <= prev_p + 1e-12);
      prev_d = env.max_discharge;
      prev_p = env.max_charge;
    }
  }
}

TEST_CASE("dispatch_to_soc lands on the target or reports it unreachable") {
  const StorageSpec nla = nonlinear_template();
  const StorageState st = state_at(nla, 0.5);
  auto down = dispatch_to_soc(nla, st, 0.35);
  REQUIRE(down);
  CHECK(soc_total(nla, apply_dispatch(nla, st, *down)) == doctest::Approx(0.35));
  CHECK_FALSE(dispatch_to_soc(nla, st, 0.0));
  auto stay = dispatch_to_soc(nla, st, 0.5);
  REQUIRE(stay);
  CHECK(stay->p == 0.0);
  CHECK(stay->d == 0.0);
}

TEST_CASE("resegment averages parameters by overlap width") {
  const StorageSpec nla = nonlinear_template();
  const StorageSpec one = resegment(nla, 1);
  REQUIRE(one.size() == 1);
  CHECK(one.segments[0].d_rating == doctest::Approx((0.175 + 0.25 + 0.25 + 0.225 + 0.125) / 5));
  CHECK(one.segments[0].cost == doctest::Approx((26.0 + 20 + 20 + 22 + 28) / 5));
  const StorageSpec same = resegment(nla, 5);
  for (std::size_t s = 0; s < 5; ++s) {
    CHECK(same.segments[s].e_end == doctest::Approx(nla.segments[s].e_end));
    CHECK(same.segments[s].eta_d == doctest::Approx(nla.segments[s].eta_d));
  }
  const StorageSpec ten = resegment(nla, 10);
  CHECK(ten.segments[1].d_rating == doctest::Approx(0.175));
  CHECK(ten.segments[2].d_rating == doctest::Approx(0.25));
  CHECK_THROWS_AS(resegment(nla, 0), Error);
}

TEST_CASE("rescale_step converts per-step ratings") {
  const StorageSpec lin = oracle::linear_spec();
  const StorageSpec five_min = rescale_step(lin, 5.0);
  CHECK(five_min.segments[0].d_rating == doctest::Approx(0.25 / 12));
  CHECK(five_min.step_minutes == 5.0);
}

TEST_CASE("drain_to_segment and fill_to_segment stop at the given segment") {
  const StorageSpec five = oracle::equal_segments(5, 1.0, 1.0, 1.0, 0.0);
  const StorageState st = state_at(five, 0.7);
  const Dispatch d = drain_to_segment(five, st, 2);
  CHECK(soc_total(five, apply_dispatch(five, st, d)) == doctest::Approx(0.4));
  const Dispatch p = fill_to_segment(five, st, 3);
  CHECK(soc_total(five, apply_dispatch(five, st, p)) == doctest::Approx(0.8));
  CHECK(discharge_segment(st) == 3u);
  CHECK(charge_segment(five, st) == 3u);
  CHECK_FALSE(discharge_segment(empty_state(five)));
}
