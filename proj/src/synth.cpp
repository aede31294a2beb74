#include "nilmaug/synth.hpp"

#include <cmath>
#include <random>

namespace nilmaug {

void SynthSpec::validate() const {
  if (duration < 0) throw ConfigError("synth duration must be >= 0");
  if (!(noise_sd >= 0.0)) throw ConfigError("synth noise_sd must be >= 0");
  for (const auto& a : appliances) {
    if (!(a.period >= 4.0)) throw ConfigError("synth appliance '" + a.name + "': period must be >= 4 s");
    if (!(a.duty > 0.0 && a.duty < 1.0)) throw ConfigError("synth appliance '" + a.name + "': duty must be in (0,1)");
    if (!(a.duty * a.period >= 2.0)) throw ConfigError("synth appliance '" + a.name + "': on time must be >= 2 s");
    if (!std::isfinite(a.on_power) || !std::isfinite(a.phase))
      throw ConfigError("synth appliance '" + a.name + "': non-finite parameter");
  }
}

SynthSpec synth_from_json(const nlohmann::json& j) {
  SynthSpec s;
  try {
    s.seed = j.value("seed", std::uint64_t{0});
    s.duration = j.at("duration").get<std::int64_t>();
    s.start = j.value("start", std::int64_t{0});
    s.noise_sd = j.value("noise_sd", 0.0);
    for (const auto& a : j.value("appliances", nlohmann::json::array())) {
      SynthAppliance app;
      app.name = a.at("name").get<std::string>();
      app.group = group_of(app.name);
      if (a.contains("group")) {
        const std::string g = a["group"].get<std::string>();
        bool found = false;
        for (auto cand : {ApplianceGroup::Cooling, ApplianceGroup::Cooking, ApplianceGroup::Entertainment,
                          ApplianceGroup::Computer, ApplianceGroup::Lighting, ApplianceGroup::Other})
          if (g == to_string(cand)) {
            app.group = cand;
            found = true;
          }
        if (!found) throw ConfigError("unknown appliance group '" + g + "'");
      }
      app.on_power = a.at("on_power").get<double>();
      app.period = a.at("period").get<double>();
      app.duty = a.at("duty").get<double>();
      app.phase = a.value("phase", 0.0);
      s.appliances.push_back(std::move(app));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad synth spec: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::json synth_to_json(const SynthSpec& s) {
  nlohmann::json apps = nlohmann::json::array();
  for (const auto& a : s.appliances)
    apps.push_back({{"name", a.name},
                    {"group", to_string(a.group)},
                    {"on_power", a.on_power},
                    {"period", a.period},
                    {"duty", a.duty},
                    {"phase", a.phase}});
  return {{"seed", s.seed}, {"duration", s.duration}, {"start", s.start}, {"noise_sd", s.noise_sd}, {"appliances", apps}};
}

SynthHousehold generate(const SynthSpec& spec) {
  spec.validate();
  const auto n = static_cast<std::size_t>(spec.duration);
  SynthHousehold h;
  h.aggregate.start = spec.start;
  h.aggregate.period = 1;
  h.aggregate.name = "aggregate";
  h.aggregate.samples.resize(n);
  for (std::size_t t = 0; t < n; ++t) h.aggregate.samples[t] = {static_cast<std::int64_t>(t), 0.0, std::nullopt};

  for (const auto& a : spec.appliances) {
    ApplianceTrace trace;
    trace.appliance = a.name;
    trace.group = a.group;
    trace.series.start = spec.start;
    trace.series.period = 1;
    trace.series.name = a.name;
    trace.series.samples.resize(n);
    const double on_time = a.duty * a.period;
    for (std::size_t t = 0; t < n; ++t) {
      const double pos = std::fmod(static_cast<double>(t) - a.phase, a.period);
      const double cycle = pos < 0.0 ? pos + a.period : pos;
      const double v = cycle < on_time ? a.on_power : 0.0;
      trace.series.samples[t] = {static_cast<std::int64_t>(t), v, std::nullopt};
      h.aggregate.samples[t].real_w += v;
    }
    h.traces.push_back(std::move(trace));
  }

  if (spec.noise_sd > 0.0) {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.noise_sd);
    for (auto& s : h.aggregate.samples) s.real_w += noise(rng);
  }
  return h;
}

}  // namespace nilmaug
