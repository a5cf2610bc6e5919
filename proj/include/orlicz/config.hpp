#pragma once

#include "orlicz/generators.hpp"
#include "orlicz/grid.hpp"
#include "orlicz/young.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace orlicz {

inline const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names{"certify-young", "norms", "maximal-bmo", "operator-norms",
                                              "elliptic-verify"};
  return names;
}

struct Scenario {
  std::string id;
  std::string task;
  std::uint64_t seed = 1;
  nlohmann::json params;  ///< the scenario object as written
};

struct Config {
  std::string source;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  std::vector<Scenario> scenarios;
};

/// Parses and validates a JSON scenario file. Throws Errc::config_parse with
/// the offending line or key, Errc::unknown_generator for unknown generators.
Config parse_config(const std::string& text, const std::string& source = "<string>");
Config load_config(const std::string& path);

/// {"family": "power", "p": 2} and friends; also the shorthand strings
/// "power(2)", "exp_minus_one", "t_log", "power_log(2)".
YoungFunction phi_from_json(const nlohmann::json& j);
Grid grid_from_json(const nlohmann::json& j);
Params params_from_json(const nlohmann::json& j);

struct CatalogEntry {
  std::string kind;
  std::string name;
  std::string params;
};

/// Young families, kernels, generators and system families.
std::vector<CatalogEntry> builtin_catalog();

}  // namespace orlicz
