#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "nilmaug/series.hpp"

namespace nilmaug {

struct SynthAppliance {
  std::string name;
  ApplianceGroup group = ApplianceGroup::Other;
  double on_power = 0.0;  // W
  double period = 0.0;    // s, >= 4
  double duty = 0.5;      // (0, 1)
  double phase = 0.0;     // s
};

struct SynthSpec {
  std::uint64_t seed = 0;
  std::int64_t duration = 0;  // s at 1 Hz
  std::int64_t start = 0;     // epoch s
  std::vector<SynthAppliance> appliances;
  double noise_sd = 0.0;  // W

  void validate() const;
};

/// {"seed":1,"duration":172800,"noise_sd":5,"appliances":[{"name":"fridge",
///  "on_power":200,"period":2400,"duty":0.4,"phase":17}]}; "group" and
/// "start" are optional.
SynthSpec synth_from_json(const nlohmann::json& j);
nlohmann::json synth_to_json(const SynthSpec& s);

struct SynthHousehold {
  PowerSeries aggregate;
  std::vector<ApplianceTrace> traces;
};

/// 1 Hz square-wave traces (on while (t - phase) mod period < duty * period)
/// and their sum plus seeded Gaussian noise.
SynthHousehold generate(const SynthSpec& spec);

}  // namespace nilmaug
