#include "socmkt/storage_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "socmkt/error.hpp"

namespace socmkt {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_spec:
      return "invalid_spec";
    case ErrorKind::invalid_argument:
      return "invalid_argument";
    case ErrorKind::infeasible:
      return "infeasible";
    case ErrorKind::parse:
      return "parse";
    case ErrorKind::io:
      return "io";
  }
  return "unknown";
}

namespace {

constexpr double kRatingSlack = 1e-9;

[[noreturn]] void spec_error(std::size_t s, const std::string& msg) {
  std::ostringstream os;
  os << "segment " << (s + 1) << ": " << msg;
  throw Error(ErrorKind::invalid_spec, os.str());
}

double snap(double v, double hi) {
  if (std::abs(v) <= kFillTolerance) return 0.0;
  if (std::abs(v - hi) <= kFillTolerance) return hi;
  return v;
}

// Highest segment holding energy, or npos when empty.
std::size_t top_nonempty(const StorageState& state) {
  for (std::size_t s = state.e_seg.size(); s-- > 0;) {
    if (state.e_seg[s] > kFillTolerance) return s;
  }
  return static_cast<std::size_t>(-1);
}

// Lowest segment with headroom, or npos when full.
std::size_t lowest_open(const StorageSpec& spec, const StorageState& state) {
  for (std::size_t s = 0; s < spec.size(); ++s) {
    if (state.e_seg[s] < spec.width(s) - kFillTolerance) return s;
  }
  return static_cast<std::size_t>(-1);
}

double d_rating_for(const StorageSpec& spec, std::size_t s, std::size_t start) {
  return spec.crossing == CrossingRule::start_segment_clamp ? spec.segments[start].d_rating
                                                            : spec.segments[s].d_rating;
}

double p_rating_for(const StorageSpec& spec, std::size_t s, std::size_t start) {
  return spec.crossing == CrossingRule::start_segment_clamp ? spec.segments[start].p_rating
                                                            : spec.segments[s].p_rating;
}

Dispatch zero_dispatch(std::size_t n) {
  Dispatch out;
  out.p_seg.assign(n, 0.0);
  out.d_seg.assign(n, 0.0);
  return out;
}

// Greedy top-down drain. Returns the dispatch and whatever part of `want` could not be met.
std::pair<Dispatch, double> drain(const StorageSpec& spec, const StorageState& state,
                                  double want, std::size_t floor_segment = 0) {
  Dispatch out = zero_dispatch(spec.size());
  const std::size_t start = top_nonempty(state);
  if (start == static_cast<std::size_t>(-1) || want <= 0.0) return {out, std::max(want, 0.0)};
  double budget = 1.0;
  for (std::size_t s = start + 1; s-- > 0;) {
    const auto& seg = spec.segments[s];
    const double rating = d_rating_for(spec, s, start);
    const double energy_cap = state.e_seg[s] * seg.eta_d;
    const double take = std::min({want, energy_cap, budget * rating});
    out.d_seg[s] = take;
    out.d += take;
    want -= take;
    budget -= take / rating;
    if (want <= 0.0 || take < energy_cap || s == floor_segment) break;
  }
  return {out, std::max(want, 0.0)};
}

// Greedy bottom-up fill.
std::pair<Dispatch, double> fill(const StorageSpec& spec, const StorageState& state, double want,
                                 std::size_t ceiling_segment = static_cast<std::size_t>(-1)) {
  Dispatch out = zero_dispatch(spec.size());
  const std::size_t start = lowest_open(spec, state);
  if (start == static_cast<std::size_t>(-1) || want <= 0.0) return {out, std::max(want, 0.0)};
  double budget = 1.0;
  for (std::size_t s = start; s < spec.size(); ++s) {
    const auto& seg = spec.segments[s];
    const double rating = p_rating_for(spec, s, start);
    const double room_cap = (spec.width(s) - state.e_seg[s]) / seg.eta_p;
    const double take = std::min({want, room_cap, budget * rating});
    out.p_seg[s] = take;
    out.p += take;
    want -= take;
    budget -= take / rating;
    if (want <= 0.0 || take < room_cap || s == ceiling_segment) break;
  }
  return {out, std::max(want, 0.0)};
}

}  // namespace

StorageSpec validate_spec(StorageSpec spec) {
  if (spec.segments.empty()) throw Error(ErrorKind::invalid_spec, "storage needs at least one segment");
  if (!std::isfinite(spec.e_min)) throw Error(ErrorKind::invalid_spec, "e_min must be finite");
  if (!(spec.step_minutes > 0.0)) throw Error(ErrorKind::invalid_spec, "step_minutes must be positive");
  double prev = spec.e_min;
  for (std::size_t s = 0; s < spec.size(); ++s) {
    const auto& seg = spec.segments[s];
    if (!(seg.e_end > prev)) spec_error(s, "breakpoints must be strictly increasing");
    if (!(seg.eta_d > 0.0 && seg.eta_d <= 1.0)) spec_error(s, "eta_d must lie in (0, 1]");
    if (!(seg.eta_p > 0.0 && seg.eta_p <= 1.0)) spec_error(s, "eta_p must lie in (0, 1]");
    if (!(seg.d_rating > 0.0)) spec_error(s, "d_rating must be positive");
    if (!(seg.p_rating > 0.0)) spec_error(s, "p_rating must be positive");
    if (!(seg.cost >= 0.0)) spec_error(s, "cost must be non-negative");
    if (!std::isfinite(seg.e_end) || !std::isfinite(seg.cost) || !std::isfinite(seg.d_rating) ||
        !std::isfinite(seg.p_rating))
      spec_error(s, "parameters must be finite");
    prev = seg.e_end;
  }
  return spec;
}

StorageSpec rescale_step(const StorageSpec& spec, double step_minutes) {
  if (!(step_minutes > 0.0)) throw Error(ErrorKind::invalid_argument, "step_minutes must be positive");
  StorageSpec out = spec;
  const double factor = step_minutes / spec.step_minutes;
  for (auto& seg : out.segments) {
    seg.d_rating *= factor;
    seg.p_rating *= factor;
  }
  out.step_minutes = step_minutes;
  return out;
}

StorageSpec resegment(const StorageSpec& spec, std::size_t k) {
  if (k == 0) throw Error(ErrorKind::invalid_argument, "segment count must be at least 1");
  StorageSpec out;
  out.e_min = spec.e_min;
  out.step_minutes = spec.step_minutes;
  out.crossing = spec.crossing;
  const double span = spec.capacity();
  for (std::size_t j = 0; j < k; ++j) {
    const double lo = spec.e_min + span * static_cast<double>(j) / static_cast<double>(k);
    const double hi = j + 1 == k ? spec.e_max()
                                 : spec.e_min + span * static_cast<double>(j + 1) / static_cast<double>(k);
    SegmentSpec acc{};
    acc.e_end = hi;
    acc.eta_d = acc.eta_p = 0.0;
    double total = 0.0;
    for (std::size_t s = 0; s < spec.size(); ++s) {
      const double overlap = std::min(hi, spec.segments[s].e_end) - std::max(lo, spec.lower(s));
      if (overlap <= 0.0) continue;
      const auto& seg = spec.segments[s];
      acc.cost += overlap * seg.cost;
      acc.d_rating += overlap * seg.d_rating;
      acc.p_rating += overlap * seg.p_rating;
      acc.eta_d += overlap * seg.eta_d;
      acc.eta_p += overlap * seg.eta_p;
      total += overlap;
    }
    acc.cost /= total;
    acc.d_rating /= total;
    acc.p_rating /= total;
    acc.eta_d /= total;
    acc.eta_p /= total;
    out.segments.push_back(acc);
  }
  return out;
}

std::size_t segment_at(const StorageSpec& spec, double e) {
  for (std::size_t s = 0; s < spec.size(); ++s) {
    if (e <= spec.segments[s].e_end + kFillTolerance) return s;
  }
  return spec.size() - 1;
}

StorageState empty_state(const StorageSpec& spec) {
  return StorageState{std::vector<double>(spec.size(), 0.0)};
}

Dispatch idle_dispatch(const StorageSpec& spec) { return zero_dispatch(spec.size()); }

StorageState state_at(const StorageSpec& spec, double soc) {
  if (soc < spec.e_min - kFillTolerance || soc > spec.e_max() + kFillTolerance) {
    std::ostringstream os;
    os << "SoC " << soc << " outside [" << spec.e_min << ", " << spec.e_max() << "]";
    throw Error(ErrorKind::invalid_argument, os.str());
  }
  StorageState state = empty_state(spec);
  double rest = std::max(0.0, soc - spec.e_min);
  for (std::size_t s = 0; s < spec.size() && rest > 0.0; ++s) {
    const double take = std::min(rest, spec.width(s));
    state.e_seg[s] = snap(take, spec.width(s));
    rest -= take;
  }
  return state;
}

double soc_total(const StorageSpec& spec, const StorageState& state) {
  double total = spec.e_min;
  for (double e : state.e_seg) total += e;
  return total;
}

void check_state(const StorageSpec& spec, const StorageState& state) {
  if (state.e_seg.size() != spec.size())
    throw Error(ErrorKind::invalid_argument, "state has wrong number of segments");
  for (std::size_t s = 0; s < spec.size(); ++s) {
    const double e = state.e_seg[s];
    if (e < -kFillTolerance || e > spec.width(s) + kFillTolerance) {
      std::ostringstream os;
      os << "segment " << (s + 1) << " energy " << e << " outside [0, " << spec.width(s) << "]";
      throw Error(ErrorKind::invalid_argument, os.str());
    }
    if (s > 0 && e > kFillTolerance && state.e_seg[s - 1] < spec.width(s - 1) - kFillTolerance) {
      std::ostringstream os;
      os << "fill order violated: segment " << (s + 1) << " holds " << e << " while segment " << s
         << " is not full";
      throw Error(ErrorKind::invalid_argument, os.str());
    }
  }
}

Envelope feasible_envelope(const StorageSpec& spec, const StorageState& state) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  return Envelope{fill(spec, state, inf).first.p, drain(spec, state, inf).first.d};
}

Dispatch plan_discharge(const StorageSpec& spec, const StorageState& state, double d) {
  auto [out, missing] = drain(spec, state, d);
  if (missing > kFillTolerance) {
    std::ostringstream os;
    os << "discharge " << d << " exceeds envelope " << out.d;
    throw Error(ErrorKind::infeasible, os.str());
  }
  return out;
}

Dispatch plan_charge(const StorageSpec& spec, const StorageState& state, double p) {
  auto [out, missing] = fill(spec, state, p);
  if (missing > kFillTolerance) {
    std::ostringstream os;
    os << "charge " << p << " exceeds envelope " << out.p;
    throw Error(ErrorKind::infeasible, os.str());
  }
  return out;
}

std::optional<Dispatch> dispatch_to_soc(const StorageSpec& spec, const StorageState& state,
                                        double target_soc) {
  const double current = soc_total(spec, state);
  Dispatch out = zero_dispatch(spec.size());
  double usage = 0.0;
  if (target_soc < current) {
    if (target_soc < spec.e_min - kFillTolerance) return std::nullopt;
    double remove = current - target_soc;
    const std::size_t start = top_nonempty(state);
    for (std::size_t s = start + 1; s-- > 0 && remove > 0.0;) {
      const double take = std::min(remove, state.e_seg[s]);
      const double d_s = take * spec.segments[s].eta_d;
      out.d_seg[s] = d_s;
      out.d += d_s;
      usage += d_s / d_rating_for(spec, s, start);
      remove -= take;
    }
    if (remove > kFillTolerance) return std::nullopt;
  } else if (target_soc > current) {
    if (target_soc > spec.e_max() + kFillTolerance) return std::nullopt;
    double add = target_soc - current;
    const std::size_t start = lowest_open(spec, state);
    if (start == static_cast<std::size_t>(-1)) return add <= kFillTolerance ? std::optional(out) : std::nullopt;
    for (std::size_t s = start; s < spec.size() && add > 0.0; ++s) {
      const double take = std::min(add, spec.width(s) - state.e_seg[s]);
      const double p_s = take / spec.segments[s].eta_p;
      out.p_seg[s] = p_s;
      out.p += p_s;
      usage += p_s / p_rating_for(spec, s, start);
      add -= take;
    }
    if (add > kFillTolerance) return std::nullopt;
  }
  if (usage > 1.0 + kRatingSlack) return std::nullopt;
  return out;
}

StorageState apply_dispatch(const StorageSpec& spec, const StorageState& state,
                            const Dispatch& dispatch) {
  const std::size_t n = spec.size();
  if (dispatch.p_seg.size() != n || dispatch.d_seg.size() != n)
    throw Error(ErrorKind::invalid_argument, "dispatch has wrong number of segments");
  if (dispatch.p < -kFillTolerance || dispatch.d < -kFillTolerance)
    throw Error(ErrorKind::infeasible, "dispatch quantities must be non-negative");
  if (dispatch.p > kFillTolerance && dispatch.d > kFillTolerance)
    throw Error(ErrorKind::infeasible, "simultaneous charge and discharge");

  const std::size_t d_start = top_nonempty(state);
  const std::size_t p_start = lowest_open(spec, state);
  double d_use = 0.0;
  double p_use = 0.0;
  StorageState next = state;
  for (std::size_t s = 0; s < n; ++s) {
    const auto& seg = spec.segments[s];
    const double d_s = dispatch.d_seg[s];
    const double p_s = dispatch.p_seg[s];
    if (d_s < -kFillTolerance || p_s < -kFillTolerance)
      throw Error(ErrorKind::infeasible, "segment quantities must be non-negative");
    if (d_s > 0.0) {
      if (d_start == static_cast<std::size_t>(-1))
        throw Error(ErrorKind::infeasible, "discharge from an empty device");
      d_use += d_s / d_rating_for(spec, s, d_start);
    }
    if (p_s > 0.0) {
      if (p_start == static_cast<std::size_t>(-1))
        throw Error(ErrorKind::infeasible, "charge into a full device");
      p_use += p_s / p_rating_for(spec, s, p_start);
    }
    double e = state.e_seg[s] - d_s / seg.eta_d + p_s * seg.eta_p;
    e = snap(e, spec.width(s));
    if (e < -kFillTolerance || e > spec.width(s) + kFillTolerance) {
      std::ostringstream os;
      os << "segment " << (s + 1) << " would end at " << e << ", outside [0, " << spec.width(s) << "]";
      throw Error(ErrorKind::infeasible, os.str());
    }
    next.e_seg[s] = std::clamp(e, 0.0, spec.width(s));
  }
  if (d_use > 1.0 + kRatingSlack || p_use > 1.0 + kRatingSlack) {
    std::ostringstream os;
    os << "rating exceeded: discharge usage " << d_use << ", charge usage " << p_use;
    throw Error(ErrorKind::infeasible, os.str());
  }
  try {
    check_state(spec, next);
  } catch (const Error& e) {
    throw Error(ErrorKind::infeasible, e.what());
  }
  return next;
}

Dispatch project_dispatch(const StorageSpec& spec, const StorageState& state, double p_hat,
                          double d_hat) {
  if (p_hat < 0.0 || d_hat < 0.0)
    throw Error(ErrorKind::invalid_argument, "instructions must be non-negative");
  const Envelope env = feasible_envelope(spec, state);
  const double pc = std::min(p_hat, env.max_charge);
  const double dc = std::min(d_hat, env.max_discharge);

  struct Candidate {
    double p, d, err;
  };
  const Candidate candidates[] = {
      {0.0, 0.0, p_hat * p_hat + d_hat * d_hat},
      {pc, 0.0, (pc - p_hat) * (pc - p_hat) + d_hat * d_hat},
      {0.0, dc, p_hat * p_hat + (dc - d_hat) * (dc - d_hat)},
  };
  const Candidate* best = &candidates[0];
  for (const auto& c : candidates) {
    if (c.err < best->err || (c.err == best->err && c.p + c.d < best->p + best->d)) best = &c;
  }
  if (best->p > 0.0) return fill(spec, state, best->p).first;
  if (best->d > 0.0) return drain(spec, state, best->d).first;
  return zero_dispatch(spec.size());
}

Dispatch drain_to_segment(const StorageSpec& spec, const StorageState& state,
                          std::size_t floor_segment) {
  if (floor_segment >= spec.size()) return zero_dispatch(spec.size());
  const std::size_t start = top_nonempty(state);
  if (start == static_cast<std::size_t>(-1) || start < floor_segment) return zero_dispatch(spec.size());
  return drain(spec, state, std::numeric_limits<double>::infinity(), floor_segment).first;
}

Dispatch fill_to_segment(const StorageSpec& spec, const StorageState& state,
                         std::size_t ceiling_segment) {
  const std::size_t start = lowest_open(spec, state);
  if (start == static_cast<std::size_t>(-1) || start > ceiling_segment) return zero_dispatch(spec.size());
  return fill(spec, state, std::numeric_limits<double>::infinity(), ceiling_segment).first;
}

std::optional<std::size_t> discharge_segment(const StorageState& state) {
  const std::size_t s = top_nonempty(state);
  if (s == static_cast<std::size_t>(-1)) return std::nullopt;
  return s;
}

std::optional<std::size_t> charge_segment(const StorageSpec& spec, const StorageState& state) {
  const std::size_t s = lowest_open(spec, state);
  if (s == static_cast<std::size_t>(-1)) return std::nullopt;
  return s;
}

double discharge_cost(const StorageSpec& spec, const Dispatch& dispatch) {
  double total = 0.0;
  for (std::size_t s = 0; s < spec.size(); ++s) total += spec.segments[s].cost * dispatch.d_seg[s];
  return total;
}

}  // namespace socmkt
