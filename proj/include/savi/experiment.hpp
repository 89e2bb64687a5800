#pragma once

#include <ostream>
#include <string>

#include "savi/config.hpp"

namespace savi {

// Runs one configured experiment, writes its report (to cfg.out, or to
// `console` when empty) and prints the headline to `console`. Returns the
// process exit code.
int run_experiment(const ExperimentConfig& cfg, std::ostream& console);

// Report body as a string, without writing files; used by golden tests.
std::string experiment_report(const ExperimentConfig& cfg, std::ostream& console);

// Prefixes relative output paths with $SAVI_OUT_DIR when it is set.
std::string resolve_output_path(const std::string& path);

} // namespace savi
