#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "squidres/errors.hpp"
#include "squidres/resonator.hpp"

namespace squidres {

/// Parsed device description plus its operating temperature.
struct LoadedConfig {
  DeviceModel dev;
  ThermalEnv env;
};

/// Environment variable naming a directory searched for config files given
/// as bare names.
inline constexpr const char* kConfigDirEnv = "SQUIDRES_CONFIG_DIR";

/// A path that exists wins; otherwise bare names resolve against
/// $SQUIDRES_CONFIG_DIR when set.
[[nodiscard]] inline std::string resolve_config_path(const std::string& arg) {
  namespace fs = std::filesystem;
  if (fs::exists(arg)) return arg;
  if (const char* dir = std::getenv(kConfigDirEnv)) {
    const fs::path candidate = fs::path(dir) / arg;
    if (fs::exists(candidate)) return candidate.string();
  }
  return arg;
}

/// Strict config parser: every key must be known, units are SI as the key
/// suffixes say, SQUID keys are required exactly when n_squids > 0.
[[nodiscard]] inline LoadedConfig parse_device_config(const std::string& text,
                                                      const std::string& file) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(file + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError(file + ": config must be a JSON object");

  static const std::set<std::string> known = {
      "f_r_hz", "z0_ohm", "cc_f", "r0_ohm", "n_squids",
      "ic0_a",  "ll_h",   "q_int", "temperature_k"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) throw ConfigError(file + ": unknown key '" + key + "'");
  }

  auto require = [&](const char* key) -> const nlohmann::json& {
    if (!doc.contains(key)) {
      throw ConfigError(file + ": missing required key '" + std::string(key) + "'");
    }
    return doc.at(key);
  };
  auto number = [&](const nlohmann::json& v, const char* key) -> double {
    if (!v.is_number()) {
      throw ConfigError(file + ": key '" + std::string(key) + "' must be a number");
    }
    return v.get<double>();
  };

  LoadedConfig cfg;
  try {
    cfg.dev.bare = bare_from_impedance(number(require("f_r_hz"), "f_r_hz"),
                                       number(require("z0_ohm"), "z0_ohm"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(file + ": " + e.what());
  }
  cfg.dev.coupling.cc_f = number(require("cc_f"), "cc_f");
  cfg.dev.coupling.r0_ohm = number(require("r0_ohm"), "r0_ohm");

  const auto& n = require("n_squids");
  if (!n.is_number_integer() || n.get<long long>() < 0) {
    throw ConfigError(file + ": key 'n_squids' must be a nonnegative integer");
  }
  cfg.dev.n_squids = n.get<int>();

  if (cfg.dev.n_squids > 0) {
    cfg.dev.squid = SquidParams{number(require("ic0_a"), "ic0_a"),
                                number(require("ll_h"), "ll_h")};
  } else if (doc.contains("ic0_a") || doc.contains("ll_h")) {
    throw ConfigError(file + ": ic0_a/ll_h are not allowed when n_squids is 0");
  }

  if (doc.contains("q_int")) {
    cfg.dev.q_int = number(doc.at("q_int"), "q_int");
  }
  cfg.env.temperature_k = number(require("temperature_k"), "temperature_k");
  if (cfg.env.temperature_k < 0.0) {
    throw ConfigError(file + ": temperature_k must be >= 0");
  }

  try {
    validate(cfg.dev);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(file + ": " + e.what());
  }
  return cfg;
}

[[nodiscard]] inline LoadedConfig load_device_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_device_config(text, path);
}

}  // namespace squidres
