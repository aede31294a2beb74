#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nilmaug/series.hpp"

namespace nilmaug {

struct ErrorReport {
  double mse = 0.0;   // W^2
  double rmse = 0.0;  // W
  std::size_t n = 0;
};

/// Mean squared difference over timestamps present in both series.
/// Both must share period and grid alignment; throws DataError when the
/// intersection is empty.
ErrorReport mse_rmse(const PowerSeries& truth, const PowerSeries& candidate);

/// Per-interval on/off rule for F-score counting.
struct OnOffRule {
  std::int64_t interval = 60;  // seconds
  double on_threshold = 10.0;  // W

  void validate() const;
};

struct ApplianceScore {
  std::string name;
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0;
};

struct FScoreReport {
  std::vector<ApplianceScore> appliances;
  double avg = 0.0;
  double dev = 0.0;  // population standard deviation of f
};

/// f = 2pr / (p + r), or 0 when p + r == 0.
double f_measure(double precision, double recall);

/// Precision/recall/F from interval counts (0 for empty denominators).
ApplianceScore score_counts(std::string name, std::size_t tp, std::size_t fp, std::size_t fn);

/// Scores every estimated appliance against its ground-truth trace. Per
/// interval the mean power of each side is compared to the on-threshold:
/// TP if both are on, FP if only the estimate is, FN if only the truth is.
/// Intervals are aligned to the later of the two series starts; intervals
/// with no samples on either side are skipped.
FScoreReport fscore(const std::map<std::string, PowerSeries>& estimates, const std::vector<ApplianceTrace>& truth,
                    const OnOffRule& rule = {});

/// Arithmetic mean of per-appliance F within each appliance group that has
/// at least one member. Groups come from group_of().
std::map<ApplianceGroup, double> group_report(const FScoreReport& f);

/// Report JSON with keys method, mse, rmse, appliances, avg, dev, groups.
/// mse/rmse are null when `error` is absent.
nlohmann::ordered_json report_json(const std::string& method, const std::optional<ErrorReport>& error,
                                   const FScoreReport& f);

}  // namespace nilmaug
