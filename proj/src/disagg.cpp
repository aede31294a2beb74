#include "nilmaug/disagg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>

namespace nilmaug {

std::vector<Signature> signatures_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ConfigError("signatures must be a JSON array");
  std::vector<Signature> out;
  try {
    for (const auto& e : j) {
      Signature s;
      s.appliance = e.at("name").get<std::string>();
      s.on_delta = e.at("on_delta_w").get<double>();
      s.min_on = e.value("min_on_s", std::int64_t{0});
      if (!(s.on_delta > 0.0)) throw ConfigError("signature '" + s.appliance + "': on_delta_w must be positive");
      if (s.min_on < 0) throw ConfigError("signature '" + s.appliance + "': min_on_s must be >= 0");
      out.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad signature entry: ") + e.what());
  }
  return out;
}

nlohmann::json signatures_to_json(std::span<const Signature> sigs) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& s : sigs) j.push_back({{"name", s.appliance}, {"on_delta_w", s.on_delta}, {"min_on_s", s.min_on}});
  return j;
}

std::vector<Signature> load_signatures(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open signatures file '" + path.string() + "'");
  try {
    return signatures_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("signatures file '" + path.string() + "': " + e.what());
  }
}

EventList detect_edges(const PowerSeries& s, double edge_threshold) {
  EventList out;
  for (std::size_t i = 1; i < s.samples.size(); ++i) {
    if (s.samples[i].offset != s.samples[i - 1].offset + 1) continue;
    const double d = s.samples[i].real_w - s.samples[i - 1].real_w;
    if (std::abs(d) >= edge_threshold) out.push_back({s.samples[i].offset, d});
  }
  return out;
}

EventList merge_transitions(const EventList& events, std::int64_t window) {
  if (window <= 1) return events;
  EventList out;
  std::size_t i = 0;
  while (i < events.size()) {
    const bool rising = events[i].delta_w > 0.0;
    std::size_t j = i + 1;
    while (j < events.size() && (events[j].delta_w > 0.0) == rising && events[j].offset - events[i].offset < window)
      ++j;
    double total = 0.0;
    for (std::size_t k = i; k < j; ++k) total += events[k].delta_w;
    double running = 0.0;
    std::int64_t at = events[i].offset;
    for (std::size_t k = i; k < j; ++k) {
      running += events[k].delta_w;
      if (std::abs(running) >= 0.5 * std::abs(total)) {
        at = events[k].offset;
        break;
      }
    }
    out.push_back({at, total});
    i = j;
  }
  return out;
}

SeriesSpan span_of(const PowerSeries& s) {
  return {s.start, s.period, s.empty() ? 0 : s.samples.back().offset + 1};
}

namespace {

void check_signatures(std::span<const Signature> sigs, const DisaggOptions& opts) {
  for (std::size_t i = 0; i < sigs.size(); ++i) {
    if (!(sigs[i].on_delta > opts.edge_threshold))
      throw ConfigError("signature '" + sigs[i].appliance + "': on_delta must exceed the edge threshold");
    for (std::size_t j = i + 1; j < sigs.size(); ++j)
      if (!(std::abs(sigs[i].on_delta - sigs[j].on_delta) > 2.0 * opts.edge_threshold))
        throw ConfigError("signatures '" + sigs[i].appliance + "' and '" + sigs[j].appliance +
                          "' are closer than twice the edge threshold");
  }
}

// Index of the candidate nearest to `magnitude` within tolerance, if any.
std::optional<std::size_t> nearest(std::span<const Signature> sigs, const std::vector<std::optional<std::int64_t>>& on,
                                   bool want_on, double magnitude, double tolerance) {
  std::optional<std::size_t> best;
  double best_err = 0.0;
  for (std::size_t k = 0; k < sigs.size(); ++k) {
    if (on[k].has_value() != want_on) continue;
    const double err = std::abs(magnitude - sigs[k].on_delta);
    if (err > tolerance * sigs[k].on_delta) continue;
    if (!best || err < best_err) {
      best = k;
      best_err = err;
    }
  }
  return best;
}

// Two appliances switching together: the pair whose summed on_delta is
// nearest to `magnitude` within tolerance.
std::optional<std::pair<std::size_t, std::size_t>> nearest_pair(std::span<const Signature> sigs,
                                                                const std::vector<std::optional<std::int64_t>>& on,
                                                                bool want_on, double magnitude, double tolerance) {
  std::optional<std::pair<std::size_t, std::size_t>> best;
  double best_err = 0.0;
  for (std::size_t a = 0; a < sigs.size(); ++a) {
    if (on[a].has_value() != want_on) continue;
    for (std::size_t b = a + 1; b < sigs.size(); ++b) {
      if (on[b].has_value() != want_on) continue;
      const double total = sigs[a].on_delta + sigs[b].on_delta;
      const double err = std::abs(magnitude - total);
      if (err > tolerance * total) continue;
      if (!best || err < best_err) {
        best = std::make_pair(a, b);
        best_err = err;
      }
    }
  }
  return best;
}

}  // namespace

Disaggregation disaggregate(const EventList& events, std::span<const Signature> sigs, const SeriesSpan& span,
                            const DisaggOptions& opts) {
  check_signatures(sigs, opts);
  if (span.period <= 0 || span.length < 0) throw ConfigError("invalid disaggregation span");

  std::vector<std::optional<std::int64_t>> on_since(sigs.size());
  std::vector<std::vector<std::pair<std::int64_t, std::int64_t>>> intervals(sigs.size());
  Disaggregation result;

  EventList sorted = events;
  std::stable_sort(sorted.begin(), sorted.end(), [](const Edge& a, const Edge& b) { return a.offset < b.offset; });
  for (const Edge& e : sorted) {
    if (e.offset < 0 || e.offset >= span.length) continue;
    const bool rising = e.delta_w > 0.0;
    const double magnitude = std::abs(e.delta_w);
    auto switch_one = [&](std::size_t k) {
      if (rising) {
        on_since[k] = e.offset;
      } else {
        intervals[k].emplace_back(*on_since[k], e.offset);
        on_since[k].reset();
      }
    };
    if (auto k = nearest(sigs, on_since, !rising, magnitude, opts.match_tolerance)) {
      switch_one(*k);
    } else if (auto pair = nearest_pair(sigs, on_since, !rising, magnitude, opts.match_tolerance)) {
      switch_one(pair->first);
      switch_one(pair->second);
    } else {
      ++(rising ? result.unmatched_on : result.unmatched_off);
    }
  }

  for (std::size_t k = 0; k < sigs.size(); ++k) {
    if (on_since[k]) intervals[k].emplace_back(*on_since[k], span.length);
    PowerSeries est;
    est.start = span.start;
    est.period = span.period;
    est.name = sigs[k].appliance;
    est.samples.resize(static_cast<std::size_t>(span.length));
    for (std::int64_t t = 0; t < span.length; ++t) est.samples[static_cast<std::size_t>(t)] = {t, 0.0, std::nullopt};
    for (const auto& [from, to] : intervals[k]) {
      if ((to - from) * span.period < sigs[k].min_on) continue;
      for (std::int64_t t = from; t < to; ++t) est.samples[static_cast<std::size_t>(t)].real_w = sigs[k].on_delta;
    }
    result.estimates.emplace(sigs[k].appliance, std::move(est));
  }
  return result;
}

std::vector<Signature> learn_signatures(const std::vector<ApplianceTrace>& traces, std::int64_t from, std::int64_t to,
                                        double on_threshold) {
  std::vector<Signature> out;
  for (const ApplianceTrace& t : traces) {
    std::vector<double> on;
    for (const Sample& s : slice(t.series, from, to).samples)
      if (s.real_w > on_threshold) on.push_back(s.real_w);
    if (on.empty()) continue;
    const auto mid = on.begin() + static_cast<std::ptrdiff_t>(on.size() / 2);
    std::nth_element(on.begin(), mid, on.end());
    double median = *mid;
    if (on.size() % 2 == 0) median = 0.5 * (median + *std::max_element(on.begin(), mid));
    out.push_back({t.appliance, median, 0});
  }
  return out;
}

}  // namespace nilmaug
