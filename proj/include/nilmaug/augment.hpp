#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "nilmaug/series.hpp"

namespace nilmaug {

/// Linear steps: the anchor gap is cut into k equal parts, part j holding
/// data(t_i) + (data(t_i+1) - data(t_i)) * j / k.
struct StepwiseParams {
  int k = 4;
};

struct SplineParams {
  enum class Boundary { Natural };
  Boundary boundary = Boundary::Natural;
};

struct DentonParams {
  enum class Conversion { First };
  Conversion conversion = Conversion::First;
  /// High-rate indicator at the target period; absent means p == 0.
  std::optional<PowerSeries> indicator;
};

struct DeviceParams {
  double threshold_w = 5.0;
  std::vector<ApplianceTrace> traces;
};

struct AugmentMethod {
  std::variant<StepwiseParams, SplineParams, DentonParams, DeviceParams> params;

  std::string name() const;
};

/// Method config as JSON, e.g. {"method":"stepwise","k":4}. Device traces
/// and Denton indicators are runtime data and not serialised.
AugmentMethod method_from_json(const nlohmann::json& j);
nlohmann::json method_to_json(const AugmentMethod& m);

/// Free-text notes about per-gap fallbacks taken during augmentation.
using Warnings = std::vector<std::string>;

PowerSeries augment_stepwise(const PowerSeries& s, std::int64_t target_period, const StepwiseParams& p,
                             const GapPolicy& gaps = {});

PowerSeries augment_cubic_spline(const PowerSeries& s, std::int64_t target_period, const SplineParams& p,
                                 const GapPolicy& gaps = {});

PowerSeries augment_denton_cholette(const PowerSeries& s, std::int64_t target_period, const DentonParams& p,
                                    const GapPolicy& gaps = {});

PowerSeries augment_device(const PowerSeries& s, std::int64_t target_period, const DeviceParams& p,
                           const GapPolicy& gaps = {}, Warnings* warnings = nullptr);

PowerSeries augment(const PowerSeries& s, std::int64_t target_period, const AugmentMethod& m,
                    const GapPolicy& gaps = {}, Warnings* warnings = nullptr);

/// A value pinned at a grid index.
struct GridAnchor {
  std::size_t index = 0;
  double value = 0.0;
};

/// Additive first-difference Denton-Cholette solution on a grid of
/// `grid_size` points: minimises sum_{t>=1} ((x_t - p_t) - (x_{t-1} - p_{t-1}))^2
/// with x pinned at every anchor. `indicator` is empty (p == 0) or grid_size
/// long. Repeated anchors must agree.
std::vector<double> denton_cholette(std::size_t grid_size, std::span<const GridAnchor> anchors,
                                    std::span<const double> indicator = {});

/// The Denton-Cholette objective of x against indicator p (empty == 0).
double denton_objective(std::span<const double> x, std::span<const double> indicator = {});

}  // namespace nilmaug
