#pragma once

#include <string>
#include <string_view>

#include "xopt/config.hpp"

namespace xopt {

// Raised for unreadable or malformed scenario files. The message names the
// source and either a line:column (syntax) or a field path (schema).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

ScenarioConfig parse_config(std::string_view text, const std::string& source = "<config>");
ScenarioConfig load_config(const std::string& path);
std::string dump_config(const ScenarioConfig& cfg);

// Re-expresses every Delta-denominated time in a new Delta. The
// confirmation lag and premium tick are sub-Delta and stay as they are.
// Throws std::invalid_argument when a time does not scale to a whole tick.
ScenarioConfig with_delta(const ScenarioConfig& cfg, Tick delta);

}  // namespace xopt
