#pragma once

// Marginal value-to-go of stored energy by backward recursion over a uniform
// SoC grid. q_t(e) is the opportunity value ($/MWh) of one more MWh held at
// the end of step t; q_T is zero.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "socmkt/storage_model.hpp"

namespace socmkt {

struct PriceSeries {
  double step_minutes = 60.0;
  std::vector<double> prices;

  std::size_t size() const noexcept { return prices.size(); }
};

void validate_prices(const PriceSeries& series);

/// Uniform grid of SoC levels, e_min + i * spacing for i < count.
struct SocGrid {
  double e_min = 0.0;
  double spacing = 0.0;
  std::size_t count = 1;

  double at(std::size_t i) const noexcept { return e_min + spacing * static_cast<double>(i); }
  double e_max() const noexcept { return at(count - 1); }

  /// Nearest grid index, ties resolved toward the lower SoC.
  std::size_t nearest(double e) const noexcept;
};

/// Grid over [E_0, E_S] with about points_per_mwh points per MWh. The spacing
/// must be finer than the smallest per-step charge move P_s * eta_p_s.
SocGrid build_grid(const StorageSpec& spec, double points_per_mwh);

struct ValueCurve {
  SocGrid grid;
  std::size_t steps = 0;   // T
  std::vector<double> q;   // (T + 1) rows of grid.count values

  std::span<const double> row(std::size_t t) const {
    return {q.data() + t * grid.count, grid.count};
  }
};

/// Receives q_t for t = T, T-1, ..., 0 in that order.
using ValueVisitor = std::function<void(std::size_t t, std::span<const double> q_t)>;

/// Streams each q_t row to the visitor without keeping the whole curve.
/// Ratings are rescaled to the price step if the spec uses a different one.
void backward_induction(const StorageSpec& spec, const PriceSeries& prices, const SocGrid& grid,
                        const ValueVisitor& visit);

ValueCurve backward_induction(const StorageSpec& spec, const PriceSeries& prices,
                              const SocGrid& grid);

double q_lookup(const ValueCurve& curve, std::size_t t, double e);

/// Piecewise-constant repetition to a finer step that divides the source step.
PriceSeries upsample_prices(const PriceSeries& series, double target_step_minutes);

}  // namespace socmkt
