#pragma once

#include <string>

#include "spotvol/harness.hpp"

namespace spotvol {

// Thrown for malformed config files, unknown keys/sections and bad values.
// The CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Plain-text config with key = value lines under [model], [experiment] and
// [estimator.<name>] sections. '#' starts a comment. Unknown keys raise
// ConfigError naming the key and the nearest valid name.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

// Fully-resolved config rendered back into the file format (deterministic,
// full float precision). parse_config_text(render_config_text(c)) resolves to
// the same experiment.
std::string render_config_text(const ExperimentConfig& config);

// Applies one "section.key=value" override (estimators address as
// estimator.<name>.<key>).
void apply_override(ExperimentConfig& config, const std::string& assignment);

// Named experiment presets wiring one simulated design plus the estimator
// suite and tunings used in its source tables.
//  - "liu2018": month-unit design, stable jumps, n = 8580 (or 42900);
//  - "realistic": year-unit design with capped jumps, 5-minute bars, T = 1/4.
// y selects the jump activity level; per-y tunings are installed when the
// value matches a tabulated one, defaults otherwise.
ExperimentConfig preset_config(const std::string& name, double y, long n_steps = 0);

bool is_known_preset(const std::string& name);

}  // namespace spotvol
