#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "afesim/simulation.hpp"

namespace afesim {

/// One `[section] key = value` entry of the scenario format.
struct ScenarioKey
{
  std::string section;
  std::string key;
  std::string default_value;
  std::string description;
};

/// Every accepted key with its default, in serialization order.
std::vector<ScenarioKey> scenario_keys();

/// Sections that must appear in every scenario file.
std::vector<std::string> required_sections();

/// Parses the sectioned key-value format. Lines starting with '#' or ';' are
/// comments. Unknown sections or keys, malformed values and missing required
/// sections raise ConfigError naming the offender.
SimConfig parse_scenario(std::istream& in);
SimConfig parse_scenario_text(const std::string& text);
SimConfig load_scenario(const std::string& path);

/// Canonical text form; parse_scenario(serialize_scenario(c)) reproduces c.
std::string serialize_scenario(const SimConfig& config);

/// Applies `section.key=value`.
void apply_override(SimConfig& config, std::string_view assignment);
void set_value(SimConfig& config, const std::string& section, const std::string& key, const std::string& value);

}  // namespace afesim
