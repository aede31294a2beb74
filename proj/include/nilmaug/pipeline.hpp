#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nilmaug/augment.hpp"
#include "nilmaug/disagg.hpp"
#include "nilmaug/metrics.hpp"
#include "nilmaug/series.hpp"

namespace nilmaug {

/// Track names accepted in ExperimentConfig::methods.
inline const std::vector<std::string> kAllTracks = {"original", "undersampled", "stepwise",
                                                    "cubic",    "denton",       "device"};

struct ExperimentConfig {
  // Either `synth` (a SynthSpec JSON file) or `input` + `traces`.
  std::filesystem::path input;
  DatasetLayout layout;
  std::filesystem::path traces;  // *.csv (canonical) or eco day-file subdirectories
  std::filesystem::path synth;
  std::optional<std::int64_t> from;  // optional analysis window, epoch s
  std::optional<std::int64_t> to;

  double split = 2.0 / 3.0;  // training fraction
  std::vector<std::string> methods = kAllTracks;
  std::int64_t low_period = 60;  // undersampled rate
  std::int64_t high_period = 1;  // reconstruction rate
  int k = 4;
  std::vector<int> k_sweep;
  double threshold_w = 5.0;
  std::filesystem::path denton_indicator;
  GapPolicy gaps;

  OnOffRule rule;
  DisaggOptions disagg;
  std::int64_t transition_window = 60;  // s; see merge_transitions
  std::filesystem::path signatures;     // empty: learn from the training split

  std::int64_t plot_window = 600;  // s of the test segment exported to plot.csv
  std::filesystem::path output = "out";
  unsigned threads = 0;  // 0: one per track

  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const ExperimentConfig& c);

struct TrackResult {
  std::string method;
  std::optional<ErrorReport> error;
  FScoreReport fscore;
  std::size_t unmatched_on = 0;
  std::size_t unmatched_off = 0;
  std::vector<std::string> warnings;
  std::optional<std::string> failure;
  int exit_code = 0;
};

struct PipelineResult {
  std::vector<TrackResult> tracks;
  int exit_code = 0;

  const TrackResult* track(const std::string& method) const;
};

/// Exit code for an exception: 2 config, 3 data, 4 numeric, 1 otherwise.
int exit_code_for(const std::exception& e);

/// Downsample -> augment -> disaggregate -> evaluate, writing under
/// cfg.output per track `<track>.csv` and `<track>.report.json`, plus
/// `comparison.json` and `plot.csv`. Stage failures are recorded in
/// `error.json` and the remaining tracks still run.
PipelineResult run_pipeline(const ExperimentConfig& cfg);

}  // namespace nilmaug
