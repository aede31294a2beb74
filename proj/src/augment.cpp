#include "nilmaug/augment.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "nilmaug/kkt.hpp"
#include "nilmaug/spline.hpp"

namespace nilmaug {

namespace {

enum class Lane { Real, Reactive };

double lane_value(const Sample& s, Lane lane) { return lane == Lane::Real ? s.real_w : *s.reactive_var; }

// Produces values for every target offset from the window's first anchor to
// its last. `offsets` are absolute target-grid offsets.
using WindowKernel =
    std::function<std::vector<double>(std::span<const std::int64_t> offsets, std::span<const double> values, Lane lane)>;

PowerSeries run_windows(const PowerSeries& s, std::int64_t target_period, const GapPolicy& gaps,
                        const WindowKernel& kernel) {
  s.validate();
  gaps.validate();
  if (target_period <= 0 || s.period % target_period != 0)
    throw ConfigError("target period " + std::to_string(target_period) + " s must divide the source period " +
                      std::to_string(s.period) + " s");
  if (s.size() < 2) throw DataError("nothing to interpolate: series '" + s.name + "' has fewer than 2 anchors");

  const std::int64_t ratio = s.period / target_period;
  const bool reactive = s.has_reactive();
  PowerSeries out;
  out.start = s.start;
  out.period = target_period;
  out.name = s.name;
  out.samples.reserve(static_cast<std::size_t>((s.samples.back().offset - s.samples.front().offset) * ratio + 1));

  std::vector<std::int64_t> offsets;
  std::vector<double> values;
  std::size_t begin = 0;
  while (begin < s.size()) {
    std::size_t end = begin + 1;
    while (end < s.size() && gaps.allows(s.samples[end].offset - s.samples[end - 1].offset)) ++end;

    offsets.clear();
    for (std::size_t i = begin; i < end; ++i) offsets.push_back(s.samples[i].offset * ratio);
    auto run_lane = [&](Lane lane) {
      values.clear();
      for (std::size_t i = begin; i < end; ++i) values.push_back(lane_value(s.samples[i], lane));
      if (offsets.size() == 1) return std::vector<double>(values);
      return kernel(offsets, values, lane);
    };
    const std::vector<double> real = run_lane(Lane::Real);
    std::vector<double> react;
    if (reactive) react = run_lane(Lane::Reactive);

    for (std::size_t d = 0; d < real.size(); ++d) {
      Sample smp;
      smp.offset = offsets.front() + static_cast<std::int64_t>(d);
      smp.real_w = real[d];
      if (reactive) smp.reactive_var = react[d];
      out.samples.push_back(smp);
    }
    begin = end;
  }
  return out;
}

std::size_t window_length(std::span<const std::int64_t> offsets) {
  return static_cast<std::size_t>(offsets.back() - offsets.front() + 1);
}

}  // namespace

std::string AugmentMethod::name() const {
  struct Visitor {
    std::string operator()(const StepwiseParams&) const { return "stepwise"; }
    std::string operator()(const SplineParams&) const { return "spline"; }
    std::string operator()(const DentonParams&) const { return "denton"; }
    std::string operator()(const DeviceParams&) const { return "device"; }
  };
  return std::visit(Visitor{}, params);
}

AugmentMethod method_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("method") || !j["method"].is_string())
    throw ConfigError("method config needs a string \"method\" field");
  const std::string m = j["method"].get<std::string>();
  try {
    if (m == "stepwise") {
      StepwiseParams p;
      p.k = j.value("k", 4);
      if (p.k < 1) throw ConfigError("stepwise k must be >= 1");
      return {p};
    }
    if (m == "spline" || m == "cubic") {
      if (j.value("boundary", std::string("natural")) != "natural")
        throw ConfigError("only the natural spline boundary is supported");
      return {SplineParams{}};
    }
    if (m == "denton") {
      if (j.value("conversion", std::string("first")) != "first")
        throw ConfigError("only Denton-Cholette conversion \"first\" is supported");
      if (j.value("variant", std::string("additive-first-difference")) != "additive-first-difference")
        throw ConfigError("only the additive first-difference Denton-Cholette variant is supported");
      return {DentonParams{}};
    }
    if (m == "device") {
      DeviceParams p;
      p.threshold_w = j.value("threshold_w", 5.0);
      if (!(p.threshold_w > 0.0)) throw ConfigError("device threshold_w must be positive");
      return {p};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad method config: ") + e.what());
  }
  throw ConfigError("unknown augmentation method '" + m + "'");
}

nlohmann::json method_to_json(const AugmentMethod& m) {
  struct Visitor {
    nlohmann::json operator()(const StepwiseParams& p) const { return {{"method", "stepwise"}, {"k", p.k}}; }
    nlohmann::json operator()(const SplineParams&) const { return {{"method", "spline"}}; }
    nlohmann::json operator()(const DentonParams&) const { return {{"method", "denton"}, {"conversion", "first"}}; }
    nlohmann::json operator()(const DeviceParams& p) const {
      return {{"method", "device"}, {"threshold_w", p.threshold_w}};
    }
  };
  return std::visit(Visitor{}, m.params);
}

PowerSeries augment_stepwise(const PowerSeries& s, std::int64_t target_period, const StepwiseParams& p,
                             const GapPolicy& gaps) {
  if (p.k < 1) throw ConfigError("stepwise k must be >= 1");
  const std::int64_t k = p.k;
  return run_windows(s, target_period, gaps, [k](auto offsets, auto values, Lane) {
    std::vector<double> out(window_length(offsets));
    for (std::size_t i = 0; i + 1 < offsets.size(); ++i) {
      const std::int64_t base = offsets[i] - offsets.front();
      const std::int64_t G = offsets[i + 1] - offsets[i];
      const double a = values[i];
      const double b = values[i + 1];
      out[static_cast<std::size_t>(base)] = a;
      for (std::int64_t d = 1; d < G; ++d) {
        const std::int64_t j = (d * k + G - 1) / G;  // ceil(d*k/G)
        // Part k is data(t_i+1) itself; the formula can miss it by an ulp.
        out[static_cast<std::size_t>(base + d)] =
            j == k ? b : a + (b - a) * static_cast<double>(j) / static_cast<double>(k);
      }
    }
    out.back() = values.back();
    return out;
  });
}

PowerSeries augment_cubic_spline(const PowerSeries& s, std::int64_t target_period, const SplineParams&,
                                 const GapPolicy& gaps) {
  return run_windows(s, target_period, gaps, [](auto offsets, auto values, Lane) {
    std::vector<Knot> knots(offsets.size());
    for (std::size_t i = 0; i < offsets.size(); ++i)
      knots[i] = {static_cast<double>(offsets[i] - offsets.front()), values[i]};
    const NaturalCubicSpline spline(knots);
    std::vector<double> out(window_length(offsets));
    for (std::size_t d = 0; d < out.size(); ++d) out[d] = spline(static_cast<double>(d));
    for (std::size_t i = 0; i < offsets.size(); ++i)
      out[static_cast<std::size_t>(offsets[i] - offsets.front())] = values[i];
    return out;
  });
}

std::vector<double> denton_cholette(std::size_t grid_size, std::span<const GridAnchor> anchors,
                                    std::span<const double> indicator) {
  if (grid_size == 0) throw ConfigError("Denton-Cholette grid must be non-empty");
  if (!indicator.empty() && indicator.size() != grid_size)
    throw ConfigError("indicator length must equal the grid size");

  std::vector<GridAnchor> pins(anchors.begin(), anchors.end());
  std::stable_sort(pins.begin(), pins.end(), [](const GridAnchor& a, const GridAnchor& b) { return a.index < b.index; });
  std::vector<GridAnchor> unique;
  for (const GridAnchor& a : pins) {
    if (a.index >= grid_size) throw ConfigError("anchor index outside the grid");
    if (!unique.empty() && unique.back().index == a.index) {
      if (unique.back().value != a.value)
        throw DataError("inconsistent anchors at grid index " + std::to_string(a.index));
      continue;
    }
    unique.push_back(a);
  }

  SymmetricBandMatrix H(grid_size, 1);
  for (std::size_t t = 1; t < grid_size; ++t) {
    H.at(t - 1, t - 1) += 1.0;
    H.at(t, t) += 1.0;
    H.at(t - 1, t) -= 1.0;
  }
  std::vector<double> b(grid_size, 0.0);
  if (!indicator.empty()) b = H.multiply(indicator);

  std::vector<ConstraintRow> rows(unique.size());
  std::vector<double> y(unique.size());
  for (std::size_t r = 0; r < unique.size(); ++r) {
    rows[r].entries = {{unique[r].index, 1.0}};
    y[r] = unique[r].value;
  }
  return solve_kkt_banded(H, rows, b, y);
}

double denton_objective(std::span<const double> x, std::span<const double> indicator) {
  double acc = 0.0;
  for (std::size_t t = 1; t < x.size(); ++t) {
    const double pt = indicator.empty() ? 0.0 : indicator[t];
    const double pp = indicator.empty() ? 0.0 : indicator[t - 1];
    const double d = (x[t] - pt) - (x[t - 1] - pp);
    acc += d * d;
  }
  return acc;
}

PowerSeries augment_denton_cholette(const PowerSeries& s, std::int64_t target_period, const DentonParams& p,
                                    const GapPolicy& gaps) {
  if (p.indicator) {
    if (p.indicator->period != target_period)
      throw ConfigError("Denton indicator period must equal the target period");
  }
  return run_windows(s, target_period, gaps, [&](auto offsets, auto values, Lane lane) {
    const std::size_t n = window_length(offsets);
    std::vector<GridAnchor> anchors(offsets.size());
    for (std::size_t i = 0; i < offsets.size(); ++i)
      anchors[i] = {static_cast<std::size_t>(offsets[i] - offsets.front()), values[i]};

    std::vector<double> indicator;
    const bool use_indicator =
        p.indicator && (lane == Lane::Real || p.indicator->has_reactive());
    if (use_indicator) {
      const SeriesLookup lookup(*p.indicator);
      indicator.resize(n);
      for (std::size_t d = 0; d < n; ++d) {
        const std::int64_t ts = s.start + (offsets.front() + static_cast<std::int64_t>(d)) * target_period;
        const Sample* smp = lookup.at(ts);
        if (!smp) throw DataError("Denton indicator has a gap at timestamp " + std::to_string(ts));
        indicator[d] = lane_value(*smp, lane);
      }
    }
    return denton_cholette(n, anchors, indicator);
  });
}

PowerSeries augment_device(const PowerSeries& s, std::int64_t target_period, const DeviceParams& p,
                           const GapPolicy& gaps, Warnings* warnings) {
  if (!(p.threshold_w > 0.0)) throw ConfigError("device threshold_w must be positive");
  if (p.traces.empty()) throw ConfigError("device interpolation needs at least one appliance trace");
  std::vector<SeriesLookup> lookups;
  for (const ApplianceTrace& t : p.traces) {
    if (t.series.period != target_period)
      throw ConfigError("trace '" + t.appliance + "' is not at the target period");
    lookups.emplace_back(t.series);
  }

  return run_windows(s, target_period, gaps, [&](auto offsets, auto values, Lane lane) {
    std::vector<double> out(window_length(offsets));
    std::vector<double> prev(lookups.size());
    for (std::size_t i = 0; i + 1 < offsets.size(); ++i) {
      const std::int64_t base = offsets[i] - offsets.front();
      const std::int64_t G = offsets[i + 1] - offsets[i];
      const double a = values[i];
      const double b = values[i + 1];
      auto ts = [&](std::int64_t d) { return s.start + (offsets[i] + d) * target_period; };

      // Trace values over [t_i, t_i+1); any hole drops the gap to a hold.
      std::int64_t switch_at = G;
      bool complete = true;
      for (std::size_t k = 0; k < lookups.size() && complete; ++k) {
        auto v = lookups[k].real_at(ts(0));
        if (!v) complete = false;
        else prev[k] = *v;
      }
      for (std::int64_t d = 1; d < G && complete; ++d) {
        for (std::size_t k = 0; k < lookups.size(); ++k) {
          auto v = lookups[k].real_at(ts(d));
          if (!v) {
            complete = false;
            break;
          }
          if (switch_at == G && std::abs(*v - prev[k]) > p.threshold_w) switch_at = d;
          prev[k] = *v;
        }
      }
      if (!complete) {
        switch_at = G;
        if (warnings && lane == Lane::Real)
          warnings->push_back("device: trace samples missing in gap starting at " + std::to_string(ts(0)) +
                              "; holding the anchor value");
      }

      out[static_cast<std::size_t>(base)] = a;
      for (std::int64_t d = 1; d < G; ++d) out[static_cast<std::size_t>(base + d)] = d < switch_at ? a : b;
    }
    out.back() = values.back();
    return out;
  });
}

PowerSeries augment(const PowerSeries& s, std::int64_t target_period, const AugmentMethod& m, const GapPolicy& gaps,
                    Warnings* warnings) {
  struct Visitor {
    const PowerSeries& s;
    std::int64_t target;
    const GapPolicy& gaps;
    Warnings* warnings;
    PowerSeries operator()(const StepwiseParams& p) const { return augment_stepwise(s, target, p, gaps); }
    PowerSeries operator()(const SplineParams& p) const { return augment_cubic_spline(s, target, p, gaps); }
    PowerSeries operator()(const DentonParams& p) const { return augment_denton_cholette(s, target, p, gaps); }
    PowerSeries operator()(const DeviceParams& p) const { return augment_device(s, target, p, gaps, warnings); }
  };
  return std::visit(Visitor{s, target_period, gaps, warnings}, m.params);
}

}  // namespace nilmaug
