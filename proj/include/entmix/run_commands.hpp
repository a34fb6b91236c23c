#pragma once

#include <iosfwd>

#include "entmix/cli_config.hpp"

namespace entmix {

// Subcommand drivers.  Each writes one CSV to `out` and returns true when the
// --assert invariants hold.  Configuration problems throw ConfigError.
bool run_profile(const ExperimentConfig& cfg, std::ostream& out);
bool run_concentrate(const ExperimentConfig& cfg, std::ostream& out);
bool run_beta(const ExperimentConfig& cfg, std::ostream& out);
bool run_forward(const ExperimentConfig& cfg, std::ostream& out);
bool run_mix(const ExperimentConfig& cfg, std::ostream& out);
bool run_stats(const ExperimentConfig& cfg, std::ostream& out);

}  // namespace entmix
