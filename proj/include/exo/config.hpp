#pragma once

#include <string>

#include "exo/sim.hpp"

namespace exo {

/// JSON model description; omitted fields keep the default_model() values.
ExoModel model_from_json_text(const std::string& text);
std::string model_to_json_text(const ExoModel& m);
ExoModel load_model_file(const std::string& path);

/// Scenario description; omitted fields keep ScenarioConfig::defaults(). Unknown keys are
/// rejected. A "model" entry may be an object or a path relative to `base_dir`.
ScenarioConfig scenario_from_json_text(const std::string& text, const std::string& base_dir = ".");
std::string scenario_to_json_text(const ScenarioConfig& cfg);
ScenarioConfig load_scenario_file(const std::string& path);

}  // namespace exo
