#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nilmaug/errors.hpp"

namespace nilmaug {

/// One present measurement. `offset` counts sample periods from the series
/// start; missing offsets are gaps.
struct Sample {
  std::int64_t offset = 0;
  double real_w = 0.0;
  std::optional<double> reactive_var;

  friend bool operator==(const Sample&, const Sample&) = default;
};

/// Uniformly-gridded power measurements with explicit gaps.
///
/// Invariants (checked by validate()): period > 0, offsets strictly
/// increasing and non-negative, every value finite, and the reactive channel
/// is present either on every sample or on none.
struct PowerSeries {
  std::int64_t start = 0;   // epoch seconds, UTC
  std::int64_t period = 1;  // seconds per sample
  std::vector<Sample> samples;
  std::string name;

  std::int64_t timestamp(std::int64_t offset) const { return start + offset * period; }
  std::int64_t timestamp_of(std::size_t i) const { return timestamp(samples[i].offset); }
  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }
  bool has_reactive() const { return !samples.empty() && samples.front().reactive_var.has_value(); }

  /// Throws DataError when an invariant is violated.
  void validate() const;

  friend bool operator==(const PowerSeries&, const PowerSeries&) = default;
};

enum class ApplianceGroup { Cooling, Cooking, Entertainment, Computer, Lighting, Other };

const char* to_string(ApplianceGroup g);

/// Fixed name -> group table. Matching ignores case, spaces, '-' and '_';
/// unknown names map to Other.
ApplianceGroup group_of(const std::string& appliance);

struct ApplianceTrace {
  std::string appliance;
  ApplianceGroup group = ApplianceGroup::Other;
  PowerSeries series;
};

/// Interpolation may bridge two consecutive anchors only when their distance
/// is at most max_gap_factor source periods. The default bridges nothing
/// that is missing.
struct GapPolicy {
  double max_gap_factor = 1.0;

  void validate() const;
  bool allows(std::int64_t offset_distance) const {
    return static_cast<double>(offset_distance) <= max_gap_factor;
  }
};

enum class LayoutFormat { CanonicalCsv, EcoDayFiles, IaweCsv };

enum class Channel { Real, Reactive };

struct DatasetLayout {
  LayoutFormat format = LayoutFormat::CanonicalCsv;
  double missing_sentinel = -1.0;
  /// Column -> channel. For eco_day_files keys are zero-based column indices
  /// ("0"); for iawe_csv they are header names ("W"). Empty means the format
  /// default.
  std::map<std::string, Channel> channel_map;
  /// Forces the sample period; 0 infers it from the timestamps.
  std::int64_t period = 0;
};

LayoutFormat parse_layout_format(const std::string& s);

/// "col=real,col=reactive" -> channel map.
std::map<std::string, Channel> parse_channel_map(const std::string& spec);

/// Reads one series. For eco_day_files `path` may be a single YYYY-MM-DD.csv
/// file or a directory of them.
PowerSeries ingest(const std::filesystem::path& path, const DatasetLayout& layout);

/// Writes the canonical CSV form (`timestamp,real_w[,reactive_var]`).
/// Gaps are omitted rows.
void write_canonical_csv(const PowerSeries& s, const std::filesystem::path& path);
std::string to_canonical_csv(const PowerSeries& s);

struct Gap {
  std::int64_t start = 0;  // first missing offset
  std::int64_t length = 0;

  friend bool operator==(const Gap&, const Gap&) = default;
};

struct GapReport {
  std::vector<Gap> gaps;
  double missing_fraction = 0.0;
};

/// Maximal runs of missing offsets between the first and last present sample.
/// missing_fraction = total gap length / (last - first + 1).
GapReport detect_gaps(const PowerSeries& s);

std::string gap_report_json(const GapReport& r);

/// Keeps the earliest present sample of every target_period bucket (buckets
/// aligned to s.start). Empty buckets become gaps.
PowerSeries downsample_first(const PowerSeries& s, std::int64_t target_period);

/// Samples with timestamp in [from, to). Start, period and offsets are kept.
PowerSeries slice(const PowerSeries& s, std::int64_t from, std::int64_t to);

/// Timestamp -> sample lookup on a series grid.
class SeriesLookup {
 public:
  explicit SeriesLookup(const PowerSeries& s) : s_(&s) {}

  const Sample* at(std::int64_t timestamp) const;
  std::optional<double> real_at(std::int64_t timestamp) const {
    const Sample* p = at(timestamp);
    return p ? std::optional<double>(p->real_w) : std::nullopt;
  }

 private:
  const PowerSeries* s_;
};

}  // namespace nilmaug
