// nilmaug: command-line front end.
//
//   nilmaug ingest       --input FILE [--layout canonical_csv|eco_day_files|iawe_csv] [--output CSV] [--gaps JSON]
//   nilmaug downsample   --input CSV --target-period S [--output CSV]
//   nilmaug augment      --input CSV --method stepwise|spline|denton|device [--k N] [--threshold-w W]
//                        [--traces DIR] [--indicator CSV] [--target-period S] [--output CSV]
//   nilmaug disaggregate --input CSV --signatures JSON [--output-dir DIR]
//   nilmaug evaluate     --truth CSV --candidate CSV | --estimates DIR --traces DIR
//   nilmaug pipeline     --config JSON [overrides...]
//   nilmaug synth        --spec JSON --output-dir DIR
//
// Every subcommand accepts --config FILE (JSON object keyed by long option
// name); explicit flags override the file, which overrides the defaults. Exit codes: 0 ok, 2 config,
// 3 data, 4 numeric. NILMAUG_LOG_LEVEL sets the log level.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "json_config.hpp"
#include "nilmaug/augment.hpp"
#include "nilmaug/disagg.hpp"
#include "nilmaug/metrics.hpp"
#include "nilmaug/pipeline.hpp"
#include "nilmaug/series.hpp"
#include "nilmaug/synth.hpp"

namespace fs = std::filesystem;
using namespace nilmaug;

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("nilmaug");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("NILMAUG_LOG_LEVEL")) spdlog::set_level(spdlog::level::from_str(env));
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

PowerSeries read_series(const std::string& path) { return ingest(path, DatasetLayout{}); }

std::vector<ApplianceTrace> read_traces(const std::string& dir) {
  std::vector<ApplianceTrace> out;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    ApplianceTrace t;
    t.appliance = f.stem().string();
    t.group = group_of(t.appliance);
    t.series = read_series(f.string());
    out.push_back(std::move(t));
  }
  if (out.empty()) throw DataError("no *.csv traces in '" + dir + "'");
  return out;
}

// Subcommand -> --config path, merged after parsing.
std::map<CLI::App*, std::string> g_config_paths;

void add_config(CLI::App* sub) {
  sub->add_option("--config", g_config_paths[sub], "JSON file with option values (flags take precedence)");
}

// Required options are checked after the config file is merged.
void require(CLI::Option* opt) {
  if (opt->count() == 0) throw ConfigError(opt->get_name() + " is required");
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Power time-series augmentation and NILM evaluation"};
  app.require_subcommand(1);

  // ingest
  auto* ingest_cmd = app.add_subcommand("ingest", "Read a dataset file into canonical CSV and report gaps");
  add_config(ingest_cmd);
  std::string in_path, in_layout = "canonical_csv", in_channels, in_out, in_gaps;
  double in_sentinel = -1.0;
  std::int64_t in_period = 0;
  auto* in_path_opt = ingest_cmd->add_option("--input", in_path, "Input file or day-file directory");
  ingest_cmd->add_option("--layout", in_layout, "canonical_csv | eco_day_files | iawe_csv");
  ingest_cmd->add_option("--missing-sentinel", in_sentinel, "Value that marks a missing sample");
  ingest_cmd->add_option("--input-period", in_period, "Sample period in seconds (0 = infer)");
  ingest_cmd->add_option("--channel-map", in_channels, "column=real|reactive,...");
  ingest_cmd->add_option("--output", in_out, "Canonical CSV output (default: none)");
  ingest_cmd->add_option("--gaps", in_gaps, "Gap report JSON output (default: stdout)");

  // downsample
  auto* down_cmd = app.add_subcommand("downsample", "Keep the first sample of every target period");
  add_config(down_cmd);
  std::string ds_in, ds_out;
  std::int64_t ds_period = 60;
  auto* ds_in_opt = down_cmd->add_option("--input", ds_in, "Canonical CSV");
  down_cmd->add_option("--target-period", ds_period, "Target period in seconds");
  down_cmd->add_option("--output", ds_out, "Output CSV (default: stdout)");

  // augment
  auto* aug_cmd = app.add_subcommand("augment", "Reconstruct a high-rate series from low-rate anchors");
  add_config(aug_cmd);
  std::string au_in, au_out, au_method = "stepwise", au_traces, au_indicator;
  std::int64_t au_period = 1;
  int au_k = 4;
  double au_threshold = 5.0, au_gap = 1.0;
  auto* au_in_opt = aug_cmd->add_option("--input", au_in, "Low-rate canonical CSV");
  aug_cmd->add_option("--method", au_method, "stepwise | spline | denton | device");
  aug_cmd->add_option("--k", au_k, "Stepwise part count");
  aug_cmd->add_option("--threshold-w", au_threshold, "Device interpolation threshold (W)");
  aug_cmd->add_option("--traces", au_traces, "Directory of per-appliance CSV traces (device)");
  aug_cmd->add_option("--indicator", au_indicator, "High-rate indicator CSV (denton)");
  aug_cmd->add_option("--target-period", au_period, "Output period in seconds");
  aug_cmd->add_option("--max-gap-factor", au_gap, "Bridge anchor distances up to this many periods");
  aug_cmd->add_option("--output", au_out, "Output CSV (default: stdout)");

  // disaggregate
  auto* dis_cmd = app.add_subcommand("disaggregate", "Baseline event-matching disaggregation");
  add_config(dis_cmd);
  std::string di_in, di_sigs, di_outdir;
  DisaggOptions di_opts;
  std::int64_t di_window = 60;
  auto* di_in_opt = dis_cmd->add_option("--input", di_in, "Aggregate canonical CSV");
  auto* di_sigs_opt = dis_cmd->add_option("--signatures", di_sigs, "Signature JSON");
  dis_cmd->add_option("--edge-threshold", di_opts.edge_threshold, "Minimum edge magnitude (W)");
  dis_cmd->add_option("--match-tolerance", di_opts.match_tolerance, "Relative signature match tolerance");
  dis_cmd->add_option("--transition-window", di_window, "Merge same-sign edges within this many seconds");
  dis_cmd->add_option("--output-dir", di_outdir, "Directory for per-appliance CSV estimates");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "MSE/RMSE and F-score reports");
  add_config(eval_cmd);
  std::string ev_truth, ev_cand, ev_est, ev_traces, ev_method = "candidate", ev_out;
  OnOffRule ev_rule;
  eval_cmd->add_option("--truth", ev_truth, "Ground-truth aggregate CSV");
  eval_cmd->add_option("--candidate", ev_cand, "Reconstructed aggregate CSV");
  eval_cmd->add_option("--estimates", ev_est, "Directory of per-appliance estimate CSVs");
  eval_cmd->add_option("--traces", ev_traces, "Directory of per-appliance ground-truth CSVs");
  eval_cmd->add_option("--method", ev_method, "Label written into the report");
  eval_cmd->add_option("--interval", ev_rule.interval, "F-score interval (s)");
  eval_cmd->add_option("--on-threshold", ev_rule.on_threshold, "On threshold (W)");
  eval_cmd->add_option("--output", ev_out, "Report JSON (default: stdout)");

  // pipeline
  auto* pipe_cmd = app.add_subcommand("pipeline", "Downsample, augment, disaggregate and evaluate");
  add_config(pipe_cmd);
  nlohmann::json pj = nlohmann::json::object();
  std::vector<std::function<void()>> pipe_collect;
  auto pipe_opt = [&](const std::string& flag, const std::string& key, auto& var, const std::string& help) {
    CLI::Option* opt = pipe_cmd->add_option(flag, var, help);
    pipe_collect.push_back([opt, &pj, key, &var] {
      if (opt->count() > 0) pj[key] = var;
    });
  };
  std::string p_input, p_layout, p_channels, p_traces, p_synth, p_indicator, p_sigs, p_output;
  double p_sentinel = -1, p_split = 0, p_threshold = 0, p_gap = 0, p_on = 0, p_edge = 0, p_tol = 0;
  std::int64_t p_period = 0, p_from = 0, p_to = 0, p_low = 0, p_high = 0, p_interval = 0, p_window = 0, p_plot = 0;
  int p_k = 0;
  unsigned p_threads = 0;
  std::vector<std::string> p_methods;
  std::vector<int> p_sweep;
  pipe_opt("--input", "input", p_input, "Aggregate input path");
  pipe_opt("--layout", "layout", p_layout, "canonical_csv | eco_day_files | iawe_csv");
  pipe_opt("--missing-sentinel", "missing_sentinel", p_sentinel, "Missing-value sentinel");
  pipe_opt("--input-period", "input_period", p_period, "Input period in seconds (0 = infer)");
  pipe_opt("--channel-map", "channel_map", p_channels, "column=real|reactive,...");
  pipe_opt("--traces", "traces", p_traces, "Directory of appliance traces");
  pipe_opt("--synth", "synth", p_synth, "Synthetic household spec JSON (replaces input/traces)");
  pipe_opt("--from", "from", p_from, "Analysis window start (epoch s)");
  pipe_opt("--to", "to", p_to, "Analysis window end (epoch s)");
  pipe_opt("--split", "split", p_split, "Training fraction");
  pipe_opt("--methods", "methods", p_methods, "Tracks to run");
  pipe_opt("--low-period", "low_period", p_low, "Undersampled period (s)");
  pipe_opt("--high-period", "high_period", p_high, "Reconstruction period (s)");
  pipe_opt("--k", "k", p_k, "Stepwise part count");
  pipe_opt("--k-sweep", "k_sweep", p_sweep, "Extra stepwise k values");
  pipe_opt("--threshold-w", "threshold_w", p_threshold, "Device interpolation threshold (W)");
  pipe_opt("--denton-indicator", "denton_indicator", p_indicator, "Indicator CSV for Denton-Cholette");
  pipe_opt("--max-gap-factor", "max_gap_factor", p_gap, "Gap policy factor");
  pipe_opt("--interval", "interval", p_interval, "F-score interval (s)");
  pipe_opt("--on-threshold", "on_threshold", p_on, "F-score on threshold (W)");
  pipe_opt("--edge-threshold", "edge_threshold", p_edge, "Edge detection threshold (W)");
  pipe_opt("--match-tolerance", "match_tolerance", p_tol, "Signature match tolerance");
  pipe_opt("--transition-window", "transition_window", p_window, "Transition merge window (s)");
  pipe_opt("--signatures", "signatures", p_sigs, "Signature JSON (default: learn from training split)");
  pipe_opt("--plot-window", "plot_window", p_plot, "Seconds exported to plot.csv");
  pipe_opt("--output", "output", p_output, "Output directory");
  pipe_opt("--threads", "threads", p_threads, "Worker threads (0 = one per track)");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic household");
  add_config(synth_cmd);
  std::string sy_spec, sy_out = "synth";
  auto* sy_spec_opt = synth_cmd->add_option("--spec", sy_spec, "SynthSpec JSON");
  synth_cmd->add_option("--output-dir", sy_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    for (CLI::App* sub : app.get_subcommands())
      if (const std::string& path = g_config_paths[sub]; !path.empty()) cli::apply_json_config(sub, path);

    if (ingest_cmd->parsed()) {
      require(in_path_opt);
      DatasetLayout layout;
      layout.format = parse_layout_format(in_layout);
      layout.missing_sentinel = in_sentinel;
      layout.period = in_period;
      layout.channel_map = parse_channel_map(in_channels);
      const PowerSeries s = ingest(in_path, layout);
      if (!in_out.empty()) write_canonical_csv(s, in_out);
      emit(gap_report_json(detect_gaps(s)) + "\n", in_gaps);
    } else if (down_cmd->parsed()) {
      require(ds_in_opt);
      emit(to_canonical_csv(downsample_first(read_series(ds_in), ds_period)), ds_out);
    } else if (aug_cmd->parsed()) {
      require(au_in_opt);
      nlohmann::json mj = {{"method", au_method}};
      if (au_method == "stepwise") mj["k"] = au_k;
      if (au_method == "device") mj["threshold_w"] = au_threshold;
      AugmentMethod m = method_from_json(mj);
      if (auto* d = std::get_if<DeviceParams>(&m.params)) {
        if (au_traces.empty()) throw ConfigError("device interpolation needs --traces");
        d->traces = read_traces(au_traces);
      }
      if (auto* d = std::get_if<DentonParams>(&m.params); d && !au_indicator.empty())
        d->indicator = read_series(au_indicator);
      Warnings warnings;
      const PowerSeries out = augment(read_series(au_in), au_period, m, GapPolicy{au_gap}, &warnings);
      for (const auto& w : warnings) spdlog::warn("{}", w);
      emit(to_canonical_csv(out), au_out);
    } else if (dis_cmd->parsed()) {
      require(di_in_opt);
      require(di_sigs_opt);
      const PowerSeries s = read_series(di_in);
      const auto sigs = load_signatures(di_sigs);
      const EventList events = merge_transitions(detect_edges(s, di_opts.edge_threshold), di_window / s.period);
      const Disaggregation d = disaggregate(events, sigs, span_of(s), di_opts);
      if (!di_outdir.empty()) {
        fs::create_directories(di_outdir);
        for (const auto& [name, est] : d.estimates) write_canonical_csv(est, fs::path(di_outdir) / (name + ".csv"));
      }
      nlohmann::ordered_json j;
      j["events"] = events.size();
      j["unmatched_on"] = d.unmatched_on;
      j["unmatched_off"] = d.unmatched_off;
      j["appliances"] = nlohmann::ordered_json::array();
      for (const auto& [name, est] : d.estimates) j["appliances"].push_back(name);
      std::cout << j.dump() << "\n";
    } else if (eval_cmd->parsed()) {
      std::optional<ErrorReport> err;
      FScoreReport f;
      if (!ev_truth.empty() || !ev_cand.empty()) {
        if (ev_truth.empty() || ev_cand.empty()) throw ConfigError("--truth and --candidate go together");
        err = mse_rmse(read_series(ev_truth), read_series(ev_cand));
      }
      if (!ev_est.empty() || !ev_traces.empty()) {
        if (ev_est.empty() || ev_traces.empty()) throw ConfigError("--estimates and --traces go together");
        std::map<std::string, PowerSeries> est;
        for (auto& t : read_traces(ev_est)) est.emplace(t.appliance, std::move(t.series));
        f = fscore(est, read_traces(ev_traces), ev_rule);
      }
      if (!err && f.appliances.empty()) throw ConfigError("nothing to evaluate");
      emit(report_json(ev_method, err, f).dump(2) + "\n", ev_out);
    } else if (pipe_cmd->parsed()) {
      for (auto& collect : pipe_collect) collect();
      if (pj.contains("synth") && pj["synth"] == "") pj.erase("synth");
      const ExperimentConfig cfg = config_from_json(pj);
      return run_pipeline(cfg).exit_code;
    } else if (synth_cmd->parsed()) {
      require(sy_spec_opt);
      const SynthHousehold h = generate(synth_from_json(read_json(sy_spec)));
      fs::create_directories(fs::path(sy_out) / "traces");
      write_canonical_csv(h.aggregate, fs::path(sy_out) / "aggregate.csv");
      for (const auto& t : h.traces) write_canonical_csv(t.series, fs::path(sy_out) / "traces" / (t.appliance + ".csv"));
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    nlohmann::ordered_json rec = {{"error", e.what()}, {"exit_code", exit_code_for(e)}};
    std::cerr << rec.dump() << "\n";
    return exit_code_for(e);
  }
  return 0;
}
