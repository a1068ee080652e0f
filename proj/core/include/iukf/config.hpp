#pragma once

#include <string>

#include "iukf/experiment.hpp"

namespace iukf {

// Reads an ExperimentConfig from a YAML file whose keys mirror the
// ExperimentConfig field names. Unknown keys raise ConfigError.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text);

}  // namespace iukf
