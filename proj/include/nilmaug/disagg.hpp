#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nilmaug/series.hpp"

namespace nilmaug {

/// Steady-state on/off signature of a single-state appliance.
struct Signature {
  std::string appliance;
  double on_delta = 0.0;     // W
  std::int64_t min_on = 0;   // s; shorter activations are discarded
};

/// Signed power change between two consecutive present samples.
struct Edge {
  std::int64_t offset = 0;
  double delta_w = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

using EventList = std::vector<Edge>;

/// Loads `[{"name":"fridge","on_delta_w":1200,"min_on_s":60}]`.
std::vector<Signature> signatures_from_json(const nlohmann::json& j);
nlohmann::json signatures_to_json(std::span<const Signature> sigs);
std::vector<Signature> load_signatures(const std::filesystem::path& path);

/// Every (t, s_t - s_{t-1}) with magnitude >= edge_threshold. Only samples
/// at adjacent offsets are compared, so no edge spans a gap.
EventList detect_edges(const PowerSeries& s, double edge_threshold);

/// Collapses runs of consecutive same-sign edges that start within
/// `window` offsets of the run's first edge into one transition. The merged
/// delta is the run's sum and its offset is the edge at which the running
/// sum first reaches half of it (mid-level crossing). window <= 1 returns
/// the input unchanged.
EventList merge_transitions(const EventList& events, std::int64_t window);

/// The grid the estimates are produced on: offsets [0, length).
struct SeriesSpan {
  std::int64_t start = 0;
  std::int64_t period = 1;
  std::int64_t length = 0;
};

SeriesSpan span_of(const PowerSeries& s);

struct DisaggOptions {
  double edge_threshold = 30.0;   // W
  double match_tolerance = 0.3;   // relative to on_delta
};

struct Disaggregation {
  std::map<std::string, PowerSeries> estimates;
  std::size_t unmatched_on = 0;
  std::size_t unmatched_off = 0;
};

/// Greedy event matching. A rising edge switches on the off appliance whose
/// on_delta is nearest (within match_tolerance); a falling edge switches off
/// the on appliance nearest in magnitude (within match_tolerance). An edge
/// that fits no single appliance may switch the best-fitting pair together.
/// Unmatched edges are counted and dropped. Estimates equal on_delta while
/// on and 0 otherwise.
Disaggregation disaggregate(const EventList& events, std::span<const Signature> sigs, const SeriesSpan& span,
                            const DisaggOptions& opts = {});

/// on_delta = median power of samples above on_threshold within [from, to).
std::vector<Signature> learn_signatures(const std::vector<ApplianceTrace>& traces, std::int64_t from,
                                        std::int64_t to, double on_threshold);

}  // namespace nilmaug
