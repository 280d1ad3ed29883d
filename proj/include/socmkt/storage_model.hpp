#pragma once

// SoC-segment storage physics.
//
// A device is split into S segments by SoC breakpoints E_0 < E_1 < ... < E_S.
// Each segment carries its own discharge cost, per-step charge/discharge
// ratings and one-way efficiencies. Energy is always stored bottom-up and
// drained top-down (fill-order logic), and within one step the segments share
// a single rating budget: sum(d_s / D_s) <= 1 for discharge, likewise for charge.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace socmkt {

/// Slack used when checking segment bounds and fill order (MWh).
inline constexpr double kFillTolerance = 1e-9;

struct SegmentSpec {
  double e_end = 0.0;     // upper SoC breakpoint E_s (MWh)
  double cost = 0.0;      // marginal discharge cost C_s ($/MWh)
  double d_rating = 0.0;  // discharge rating D_s (MWh per dispatch step)
  double p_rating = 0.0;  // charge rating P_s (MWh per dispatch step)
  double eta_d = 1.0;
  double eta_p = 1.0;
};

/// How the rating constraint behaves when one step crosses segment boundaries.
enum class CrossingRule {
  mixture,              // sum over crossed segments of d_s / D_s <= 1
  start_segment_clamp,  // the starting segment's rating caps the whole step
};

struct StorageSpec {
  double e_min = 0.0;
  std::vector<SegmentSpec> segments;
  double step_minutes = 60.0;  // step the ratings are expressed in
  CrossingRule crossing = CrossingRule::mixture;

  std::size_t size() const noexcept { return segments.size(); }
  double e_max() const noexcept { return segments.empty() ? e_min : segments.back().e_end; }
  double lower(std::size_t s) const noexcept { return s == 0 ? e_min : segments[s - 1].e_end; }
  double width(std::size_t s) const noexcept { return segments[s].e_end - lower(s); }
  double capacity() const noexcept { return e_max() - e_min; }
};

/// Per-segment stored energy above E_0, each within [0, width_s].
struct StorageState {
  std::vector<double> e_seg;
};

/// One step of storage action. Either p or d is zero.
struct Dispatch {
  double p = 0.0;
  double d = 0.0;
  std::vector<double> p_seg;
  std::vector<double> d_seg;

  double net_output() const noexcept { return d - p; }
};

struct Envelope {
  double max_charge = 0.0;
  double max_discharge = 0.0;
};

/// Throws Error(invalid_spec) naming the first violated invariant.
StorageSpec validate_spec(StorageSpec spec);

/// Same spec with ratings converted to a different dispatch step.
StorageSpec rescale_step(const StorageSpec& spec, double step_minutes);

/// Splits [E_0, E_S] into k equal-width segments whose parameters are the
/// width-weighted averages of the source spec over each range.
StorageSpec resegment(const StorageSpec& spec, std::size_t k);

/// Segment housing SoC level e, using (E_{s-1}, E_s] with E_0 mapped to segment 0.
std::size_t segment_at(const StorageSpec& spec, double e);

StorageState empty_state(const StorageSpec& spec);

/// Zero dispatch sized for the spec.
Dispatch idle_dispatch(const StorageSpec& spec);

/// The unique fill-order state holding a given total SoC.
StorageState state_at(const StorageSpec& spec, double soc);

double soc_total(const StorageSpec& spec, const StorageState& state);

/// Throws Error(invalid_argument) on bound or fill-order violations.
void check_state(const StorageSpec& spec, const StorageState& state);

Envelope feasible_envelope(const StorageSpec& spec, const StorageState& state);

/// Greedy top-down discharge split for a total output d. Throws if d exceeds the envelope.
Dispatch plan_discharge(const StorageSpec& spec, const StorageState& state, double d);

/// Greedy bottom-up charge split for a total intake p. Throws if p exceeds the envelope.
Dispatch plan_charge(const StorageSpec& spec, const StorageState& state, double p);

/// Dispatch that moves the device to a target total SoC in one step, if the
/// ratings allow it.
std::optional<Dispatch> dispatch_to_soc(const StorageSpec& spec, const StorageState& state,
                                        double target_soc);

StorageState apply_dispatch(const StorageSpec& spec, const StorageState& state,
                            const Dispatch& dispatch);

/// Feasible dispatch closest to the instruction (p_hat, d_hat) in squared error.
Dispatch project_dispatch(const StorageSpec& spec, const StorageState& state, double p_hat,
                          double d_hat);

/// Drains at the maximum feasible rate without going below `floor_segment`.
Dispatch drain_to_segment(const StorageSpec& spec, const StorageState& state,
                          std::size_t floor_segment);

/// Charges at the maximum feasible rate without going above `ceiling_segment`.
Dispatch fill_to_segment(const StorageSpec& spec, const StorageState& state,
                         std::size_t ceiling_segment);

/// Segment a discharge would start from (top non-empty), if any.
std::optional<std::size_t> discharge_segment(const StorageState& state);

/// Segment a charge would start into (lowest with headroom), if any.
std::optional<std::size_t> charge_segment(const StorageSpec& spec, const StorageState& state);

/// Physical discharge cost sum_s C_s d_s.
double discharge_cost(const StorageSpec& spec, const Dispatch& dispatch);

}  // namespace socmkt
