#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nilmaug/errors.hpp"

namespace nilmaug::cli {

/// Fills options of `sub` that were not given on the command line from a
/// flat JSON object ({"low_period": 60, "methods": ["device"]}). Keys may use
/// '_' or '-'; arrays feed multi-value options. Command-line values win.
inline void apply_json_config(CLI::App* sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file '" + path + "' must hold a JSON object");

  auto scalar = [](const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return std::string(v.get<bool>() ? "true" : "false");
    return v.dump();
  };
  for (const auto& [key, value] : j.items()) {
    std::string name = key;
    for (char& c : name)
      if (c == '_') c = '-';
    CLI::Option* opt = sub->get_option_no_throw("--" + name);
    if (!opt || name == "config") throw ConfigError("unknown config key '" + key + "' for " + sub->get_name());
    if (opt->count() > 0) continue;
    std::vector<std::string> inputs;
    if (value.is_array()) {
      for (const auto& v : value) inputs.push_back(scalar(v));
    } else if (value.is_object()) {
      throw ConfigError("config key '" + key + "' must not be an object");
    } else {
      inputs.push_back(scalar(value));
    }
    try {
      opt->add_result(inputs);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw ConfigError("config key '" + key + "': " + e.what());
    }
  }
}

}  // namespace nilmaug::cli
