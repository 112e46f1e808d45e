// Declarative experiment runner: executes one named pipeline from a config
// section, writes CSV artifacts and a hash manifest.
#pragma once
#include <string>
#include <vector>

#include "invlab/config.hpp"

namespace invlab {

struct RunResult {
    bool ok = false;                 // all invariant checks inside the pipeline passed
    std::vector<std::string> files;  // artifact paths relative to the output dir
    std::string summary;             // human-readable report (also written to report.txt)
};

// Executes cfg.pipeline, writes artifacts and `manifest` under out_dir.
// Throws ConfigError for unknown pipelines, missing or unknown keys.
RunResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

// Parses and validates a config without running it.
void validate_experiment(const ExperimentConfig& cfg);

} // namespace invlab
