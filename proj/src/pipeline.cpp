#include "nilmaug/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <map>
#include <sstream>

#include <spdlog/spdlog.h>

#include "nilmaug/format.hpp"
#include "nilmaug/kkt.hpp"
#include "nilmaug/synth.hpp"

namespace nilmaug {

namespace fs = std::filesystem;

namespace {

std::string channel_map_string(const std::map<std::string, Channel>& m) {
  std::string out;
  for (const auto& [col, ch] : m) {
    if (!out.empty()) out += ',';
    out += col + "=" + (ch == Channel::Real ? "real" : "reactive");
  }
  return out;
}

const char* layout_name(LayoutFormat f) {
  switch (f) {
    case LayoutFormat::CanonicalCsv: return "canonical_csv";
    case LayoutFormat::EcoDayFiles: return "eco_day_files";
    case LayoutFormat::IaweCsv: return "iawe_csv";
  }
  return "canonical_csv";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
}

struct Inputs {
  PowerSeries aggregate;
  std::vector<ApplianceTrace> traces;
};

Inputs load_inputs(const ExperimentConfig& cfg) {
  Inputs in;
  if (!cfg.synth.empty()) {
    std::ifstream f(cfg.synth);
    if (!f) throw ConfigError("cannot open synth spec '" + cfg.synth.string() + "'");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("synth spec '" + cfg.synth.string() + "': " + e.what());
    }
    SynthHousehold h = generate(synth_from_json(j));
    in.aggregate = std::move(h.aggregate);
    in.traces = std::move(h.traces);
  } else {
    in.aggregate = ingest(cfg.input, cfg.layout);
    if (!fs::is_directory(cfg.traces)) throw DataError("traces directory '" + cfg.traces.string() + "' not found");
    std::vector<fs::path> entries;
    for (const auto& e : fs::directory_iterator(cfg.traces)) entries.push_back(e.path());
    std::sort(entries.begin(), entries.end());
    for (const auto& p : entries) {
      ApplianceTrace t;
      if (fs::is_directory(p)) {
        DatasetLayout eco;
        eco.format = LayoutFormat::EcoDayFiles;
        eco.missing_sentinel = cfg.layout.missing_sentinel;
        t.series = ingest(p, eco);
        t.appliance = p.filename().string();
      } else if (p.extension() == ".csv") {
        t.series = ingest(p, DatasetLayout{});
        t.appliance = p.stem().string();
      } else {
        continue;
      }
      t.series.name = t.appliance;
      t.group = group_of(t.appliance);
      in.traces.push_back(std::move(t));
    }
    if (in.traces.empty()) throw DataError("no appliance traces under '" + cfg.traces.string() + "'");
  }
  if (cfg.from || cfg.to) {
    const std::int64_t from = cfg.from.value_or(INT64_MIN / 2);
    const std::int64_t to = cfg.to.value_or(INT64_MAX / 2);
    in.aggregate = slice(in.aggregate, from, to);
    for (auto& t : in.traces) t.series = slice(t.series, from, to);
  }
  if (in.aggregate.empty()) throw DataError("aggregate series is empty");
  return in;
}

// Drops learned signatures that sit too close to an earlier one.
std::vector<Signature> separate(std::vector<Signature> sigs, double edge_threshold) {
  std::vector<Signature> out;
  for (auto& s : sigs) {
    if (!(s.on_delta > edge_threshold)) {
      spdlog::warn("dropping learned signature '{}' ({:.1f} W): below the edge threshold", s.appliance, s.on_delta);
      continue;
    }
    const bool clash = std::any_of(out.begin(), out.end(), [&](const Signature& o) {
      return !(std::abs(o.on_delta - s.on_delta) > 2.0 * edge_threshold);
    });
    if (clash) {
      spdlog::warn("dropping learned signature '{}' ({:.1f} W): too close to another appliance", s.appliance,
                   s.on_delta);
      continue;
    }
    out.push_back(std::move(s));
  }
  return out;
}

struct Shared {
  const ExperimentConfig& cfg;
  PowerSeries truth_high;
  PowerSeries low;
  std::vector<ApplianceTrace> traces_high;
  std::vector<ApplianceTrace> truth_test;
  std::vector<Signature> sigs;
  std::optional<PowerSeries> indicator;
  std::int64_t test_from = 0;
  std::int64_t test_to = 0;
};

struct TrackOutput {
  TrackResult result;
  std::optional<PowerSeries> series;
};

std::optional<AugmentMethod> method_for(const std::string& track, const Shared& sh) {
  if (track == "stepwise") return AugmentMethod{StepwiseParams{sh.cfg.k}};
  if (track.rfind("stepwise_k", 0) == 0) return AugmentMethod{StepwiseParams{std::stoi(track.substr(10))}};
  if (track == "cubic") return AugmentMethod{SplineParams{}};
  if (track == "denton") {
    DentonParams p;
    p.indicator = sh.indicator;
    return AugmentMethod{p};
  }
  if (track == "device") {
    DeviceParams p;
    p.threshold_w = sh.cfg.threshold_w;
    p.traces = sh.traces_high;
    return AugmentMethod{p};
  }
  return std::nullopt;
}

TrackOutput run_track(const std::string& track, const Shared& sh) {
  TrackOutput out;
  out.result.method = track;
  try {
    PowerSeries candidate;
    if (track == "original") {
      candidate = sh.truth_high;
    } else if (track == "undersampled") {
      candidate = sh.low;
    } else {
      candidate = augment(sh.low, sh.cfg.high_period, *method_for(track, sh), sh.cfg.gaps, &out.result.warnings);
    }
    candidate.name = track;

    if (track != "undersampled")
      out.result.error =
          mse_rmse(slice(sh.truth_high, sh.test_from, sh.test_to), slice(candidate, sh.test_from, sh.test_to));

    const EventList events = merge_transitions(detect_edges(candidate, sh.cfg.disagg.edge_threshold),
                                               sh.cfg.transition_window / candidate.period);
    Disaggregation d = disaggregate(events, sh.sigs, span_of(candidate), sh.cfg.disagg);
    out.result.unmatched_on = d.unmatched_on;
    out.result.unmatched_off = d.unmatched_off;
    for (auto& [name, est] : d.estimates) est = slice(est, sh.test_from, sh.test_to);
    out.result.fscore = fscore(d.estimates, sh.truth_test, sh.cfg.rule);
    out.series = std::move(candidate);
    spdlog::info("{}: avg F {:.3f}, unmatched edges {}/{}", track, out.result.fscore.avg, d.unmatched_on,
                 d.unmatched_off);
  } catch (const std::exception& e) {
    out.result.failure = e.what();
    out.result.exit_code = exit_code_for(e);
    spdlog::error("{}: {}", track, e.what());
  }
  return out;
}

void write_error_record(const fs::path& dir, const std::string& stage, const std::vector<TrackResult>& failed,
                        const std::string& message, int code) {
  nlohmann::ordered_json j;
  j["exit_code"] = code;
  j["errors"] = nlohmann::ordered_json::array();
  if (!message.empty()) j["errors"].push_back({{"stage", stage}, {"message", message}});
  for (const auto& t : failed)
    j["errors"].push_back({{"stage", "track"}, {"method", t.method}, {"message", *t.failure}, {"exit_code", t.exit_code}});
  write_text(dir / "error.json", j.dump(2) + "\n");
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!(split > 0.0 && split < 1.0)) throw ConfigError("split must be in (0,1)");
  if (methods.empty() && k_sweep.empty()) throw ConfigError("at least one method is required");
  for (const auto& m : methods)
    if (std::find(kAllTracks.begin(), kAllTracks.end(), m) == kAllTracks.end())
      throw ConfigError("unknown method '" + m + "'");
  if (high_period <= 0 || low_period <= 0 || low_period % high_period != 0)
    throw ConfigError("low_period must be a positive multiple of high_period");
  if (k < 1) throw ConfigError("k must be >= 1");
  for (int kk : k_sweep)
    if (kk < 1) throw ConfigError("k_sweep values must be >= 1");
  if (!(threshold_w > 0.0)) throw ConfigError("threshold_w must be positive");
  if (transition_window < 0) throw ConfigError("transition_window must be >= 0");
  if (plot_window < 0) throw ConfigError("plot_window must be >= 0");
  if (synth.empty() && (input.empty() || traces.empty()))
    throw ConfigError("either synth or both input and traces are required");
  gaps.validate();
  rule.validate();
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("experiment config must be a JSON object");
  ExperimentConfig c;
  try {
    c.input = j.value("input", std::string());
    if (j.contains("layout")) c.layout.format = parse_layout_format(j["layout"].get<std::string>());
    c.layout.missing_sentinel = j.value("missing_sentinel", c.layout.missing_sentinel);
    c.layout.period = j.value("input_period", c.layout.period);
    if (j.contains("channel_map")) c.layout.channel_map = parse_channel_map(j["channel_map"].get<std::string>());
    c.traces = j.value("traces", std::string());
    c.synth = j.value("synth", std::string());
    if (j.contains("from")) c.from = j["from"].get<std::int64_t>();
    if (j.contains("to")) c.to = j["to"].get<std::int64_t>();
    c.split = j.value("split", c.split);
    if (j.contains("methods")) c.methods = j["methods"].get<std::vector<std::string>>();
    c.low_period = j.value("low_period", c.low_period);
    c.high_period = j.value("high_period", c.high_period);
    c.k = j.value("k", c.k);
    if (j.contains("k_sweep")) c.k_sweep = j["k_sweep"].get<std::vector<int>>();
    c.threshold_w = j.value("threshold_w", c.threshold_w);
    c.denton_indicator = j.value("denton_indicator", std::string());
    c.gaps.max_gap_factor = j.value("max_gap_factor", c.gaps.max_gap_factor);
    c.rule.interval = j.value("interval", c.rule.interval);
    c.rule.on_threshold = j.value("on_threshold", c.rule.on_threshold);
    c.disagg.edge_threshold = j.value("edge_threshold", c.disagg.edge_threshold);
    c.disagg.match_tolerance = j.value("match_tolerance", c.disagg.match_tolerance);
    c.transition_window = j.value("transition_window", c.transition_window);
    c.signatures = j.value("signatures", std::string());
    c.plot_window = j.value("plot_window", c.plot_window);
    c.output = j.value("output", std::string("out"));
    c.threads = j.value("threads", 0u);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["input"] = c.input.string();
  j["layout"] = layout_name(c.layout.format);
  j["missing_sentinel"] = c.layout.missing_sentinel;
  j["input_period"] = c.layout.period;
  j["channel_map"] = channel_map_string(c.layout.channel_map);
  j["traces"] = c.traces.string();
  j["synth"] = c.synth.string();
  if (c.from) j["from"] = *c.from;
  if (c.to) j["to"] = *c.to;
  j["split"] = c.split;
  j["methods"] = c.methods;
  j["low_period"] = c.low_period;
  j["high_period"] = c.high_period;
  j["k"] = c.k;
  j["k_sweep"] = c.k_sweep;
  j["threshold_w"] = c.threshold_w;
  j["denton_indicator"] = c.denton_indicator.string();
  j["max_gap_factor"] = c.gaps.max_gap_factor;
  j["interval"] = c.rule.interval;
  j["on_threshold"] = c.rule.on_threshold;
  j["edge_threshold"] = c.disagg.edge_threshold;
  j["match_tolerance"] = c.disagg.match_tolerance;
  j["transition_window"] = c.transition_window;
  j["signatures"] = c.signatures.string();
  j["plot_window"] = c.plot_window;
  j["output"] = c.output.string();
  j["threads"] = c.threads;
  return j;
}

const TrackResult* PipelineResult::track(const std::string& method) const {
  for (const auto& t : tracks)
    if (t.method == method) return &t;
  return nullptr;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const DataError*>(&e)) return 3;
  if (dynamic_cast<const NumericError*>(&e)) return 4;
  return 1;
}

PipelineResult run_pipeline(const ExperimentConfig& cfg) {
  PipelineResult result;
  fs::create_directories(cfg.output);
  fs::remove(cfg.output / "error.json");

  std::optional<Shared> shared;
  try {
    cfg.validate();
    Inputs in = load_inputs(cfg);
    const PowerSeries& original = in.aggregate;
    if (cfg.high_period % original.period != 0)
      throw ConfigError("high_period must be a multiple of the input period " + std::to_string(original.period) + " s");

    shared.emplace(Shared{cfg, {}, {}, {}, {}, {}, {}, 0, 0});
    Shared& sh = *shared;
    sh.truth_high = downsample_first(original, cfg.high_period);
    sh.low = downsample_first(original, cfg.low_period);
    for (const auto& t : in.traces) {
      ApplianceTrace th = t;
      th.series = downsample_first(t.series, cfg.high_period);
      sh.traces_high.push_back(std::move(th));
    }

    const std::int64_t begin = original.timestamp_of(0);
    const std::int64_t end = original.timestamp_of(original.size() - 1) + original.period;
    const auto train_units = static_cast<std::int64_t>(std::floor(cfg.split * static_cast<double>(end - begin) /
                                                                  static_cast<double>(cfg.low_period)));
    sh.test_from = begin + train_units * cfg.low_period;
    sh.test_to = end;
    if (sh.test_from >= sh.test_to) throw ConfigError("split leaves no test segment");
    for (const auto& t : in.traces) {
      ApplianceTrace tt = t;
      tt.series = slice(t.series, sh.test_from, sh.test_to);
      sh.truth_test.push_back(std::move(tt));
    }

    if (!cfg.signatures.empty()) {
      sh.sigs = load_signatures(cfg.signatures);
    } else {
      sh.sigs = separate(learn_signatures(in.traces, begin, sh.test_from, cfg.rule.on_threshold),
                         cfg.disagg.edge_threshold);
    }
    if (sh.sigs.empty()) throw DataError("no appliance signatures available");
    if (!cfg.denton_indicator.empty()) sh.indicator = ingest(cfg.denton_indicator, DatasetLayout{});
    spdlog::info("{} samples, test segment [{}, {}), {} signatures", original.size(), sh.test_from, sh.test_to,
                 sh.sigs.size());
  } catch (const std::exception& e) {
    result.exit_code = exit_code_for(e);
    write_error_record(cfg.output, "setup", {}, e.what(), result.exit_code);
    return result;
  }

  std::vector<std::string> tracks = cfg.methods;
  for (int kk : cfg.k_sweep) tracks.push_back("stepwise_k" + std::to_string(kk));

  std::vector<TrackOutput> outputs(tracks.size());
  const std::size_t workers = cfg.threads == 0 ? tracks.size() : cfg.threads;
  for (std::size_t batch = 0; batch < tracks.size(); batch += workers) {
    std::vector<std::future<TrackOutput>> futures;
    for (std::size_t i = batch; i < std::min(tracks.size(), batch + workers); ++i)
      futures.push_back(std::async(std::launch::async, run_track, tracks[i], std::cref(*shared)));
    for (std::size_t i = 0; i < futures.size(); ++i) outputs[batch + i] = futures[i].get();
  }

  const Shared& sh = *shared;
  nlohmann::ordered_json comparison;
  comparison["config"] = config_to_json(cfg);
  comparison["test_segment"] = {{"from", sh.test_from}, {"to", sh.test_to}};
  comparison["signatures"] = signatures_to_json(sh.sigs);
  comparison["tracks"] = nlohmann::ordered_json::array();
  std::string plot = "method,offset,value\n";
  std::vector<TrackResult> failed;

  for (auto& out : outputs) {
    TrackResult& r = out.result;
    if (r.failure) {
      failed.push_back(r);
      result.exit_code = std::max(result.exit_code, r.exit_code);
    } else {
      write_canonical_csv(*out.series, cfg.output / (r.method + ".csv"));
      nlohmann::ordered_json rep = report_json(r.method, r.error, r.fscore);
      rep["unmatched_on"] = r.unmatched_on;
      rep["unmatched_off"] = r.unmatched_off;
      rep["warnings"] = r.warnings;
      write_text(cfg.output / (r.method + ".report.json"), rep.dump(2) + "\n");

      nlohmann::ordered_json row;
      row["method"] = r.method;
      row["mse"] = rep["mse"];
      row["rmse"] = rep["rmse"];
      row["avg"] = r.fscore.avg;
      row["dev"] = r.fscore.dev;
      row["groups"] = rep["groups"];
      comparison["tracks"].push_back(row);

      for (const Sample& s : slice(*out.series, sh.test_from, sh.test_from + cfg.plot_window).samples) {
        plot += r.method;
        plot += ',';
        plot += std::to_string(out.series->timestamp(s.offset) - sh.test_from);
        plot += ',';
        plot += format_double(s.real_w);
        plot += '\n';
      }
    }
    result.tracks.push_back(std::move(r));
  }

  write_text(cfg.output / "comparison.json", comparison.dump(2) + "\n");
  write_text(cfg.output / "plot.csv", plot);
  if (!failed.empty()) write_error_record(cfg.output, "track", failed, "", result.exit_code);
  return result;
}

}  // namespace nilmaug
