#pragma once

#include <string>
#include <vector>

#include "herdlab/config.hpp"

namespace herdlab {

struct OutputBundle {
    std::string directory;
    std::vector<std::string> files; // relative names in write order, manifest last
    std::string summary_json;       // pretty-printed run summary
};

// Shortest decimal text that round-trips the value exactly.
std::string format_number(double v);

// Lowercase hex SHA-256 digest.
std::string sha256_hex(const std::string& bytes);

// Executes the configured experiment: writes every declared output plus
// config_effective.json and manifest.json into config.output_dir, removing
// partial outputs if anything fails. Rerunning the same config rewrites the
// same bytes regardless of the thread count.
OutputBundle run_experiment(const ExperimentConfig& config, int threads = 1);

} // namespace herdlab
