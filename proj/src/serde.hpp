#pragma once

// JSON (de)serialization helpers shared by config, checkpoint and record
// code. Kept out of the public headers.

#include <json.hpp>
#include <set>
#include <string>

#include "evmc/common.hpp"
#include "evmc/couplings.hpp"
#include "evmc/vit.hpp"

namespace evmc::serde {

using json = nlohmann::json;

/// Strict-key guard: every key of `obj` must be in `allowed`; errors name the
/// full path of the offending key.
inline void expect_keys(const json& obj, const std::set<std::string>& allowed,
                        const std::string& path) {
  check(obj.is_object(), "config: '" + path + "' must be an object");
  for (const auto& [key, _] : obj.items())
    if (!allowed.count(key))
      throw ConfigError("config: unknown key '" + (path.empty() ? key : path + "." + key) + "'");
}

template <typename T>
T require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key))
    throw ConfigError("config: missing key '" + (path.empty() ? key : path + "." + key) + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: bad value for '" + (path.empty() ? key : path + "." + key) + "'");
  }
}

template <typename T>
T get_or(const json& obj, const std::string& key, const std::string& path, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config: bad value for '" + (path.empty() ? key : path + "." + key) + "'");
  }
}

json vit_config_to_json(const ViTConfig& cfg);
ViTConfig vit_config_from_json(const json& j, const std::string& path);

json distribution_to_json(const CouplingDistribution& dist);
CouplingDistribution distribution_from_json(const json& j, const std::string& path);

}  // namespace evmc::serde
