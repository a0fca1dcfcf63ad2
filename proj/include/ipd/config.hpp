#pragma once

#include "ipd/sim.hpp"

#include <string>

namespace ipd {

struct GridSettings {
  double lambda_max = 0.00125;
  double theta_max = 0.0012;
  std::size_t steps = 26;
};

/// Everything a config file can set. Subcommands read the parts they need.
struct RunConfig {
  ScenarioConfig scenario;
  GridSettings grid;
};

/// Parses an INI file with sections [run], [cost], [bootstrap], [preferences],
/// [decision], [simulation], [forest] and [grid]. Unknown sections or keys
/// raise ConfigError; a missing file raises IoError.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text);

}  // namespace ipd
