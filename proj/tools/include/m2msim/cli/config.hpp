#pragma once

#include <span>
#include <string>
#include <string_view>

#include <m2msim/engine.hpp>

namespace m2msim::cli {

// Built-in profile text, or empty if `name` is not a profile.
std::string_view builtin_profile(std::string_view name);

// `source` is a profile name or a YAML file path. Overrides are
// "dotted.path=value"; list entries are addressed as slices.0.weight.
ScenarioConfig load_config(const std::string& source, std::span<const std::string> overrides = {});
ScenarioConfig parse_config(const std::string& yaml_text, std::span<const std::string> overrides = {});
std::string serialize_config(const ScenarioConfig& config);

}  // namespace m2msim::cli
