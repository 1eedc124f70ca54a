#pragma once

#include <stdexcept>
#include <string>

#include "ofsim/sim.hpp"

namespace ofsim {

// Raised for unreadable, unparsable, or invalid scenario documents; the
// message names the offending file, field, or value.
struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parses and validates a scenario document (JSON, field names documented in
// the README and mirrored by ScenarioSpec).
ScenarioSpec load_scenario(const std::string& path);
ScenarioSpec parse_scenario(const std::string& text, const std::string& origin);

}  // namespace ofsim
