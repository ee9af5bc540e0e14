#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace herdlab {

enum class Mode { Urn, Market, Sweep, Inject };

std::string mode_name(Mode m);
Mode mode_from_name(const std::string& name);

struct UrnSection {
    std::vector<std::uint64_t> initial_counts = {1, 1};
    double gamma = 1.0;
    std::uint64_t increment = 1;
    std::uint64_t steps = 1000;
    std::uint64_t n_runs = 1;
    std::uint64_t decimation = 1; // keep every k-th step plus the final one
    bool operator==(const UrnSection&) const = default;
};

struct MarketSection {
    std::uint64_t n_items = 50;
    std::uint64_t n_agents = 1200;
    std::uint64_t actions_per_agent = 1;
    double alpha = 1.0;
    double beta = 1.0;
    double rank_bias = 1.0;
    double appeal_low = 0.2;
    double appeal_high = 0.8;
    std::vector<std::string> conditions = {"independent", "weak", "strong"};
    std::uint64_t worlds_per_condition = 8;
    std::vector<double> prediction_fractions = {0.05, 0.1, 0.15, 0.2, 0.3, 0.5, 0.75, 1.0};
    std::uint64_t rigidity_bins = 8;
    bool write_traces = true;
    bool operator==(const MarketSection&) const = default;
};

struct SweepSection {
    std::string parameter = "beta"; // alpha | beta | rank_bias | gamma
    std::vector<double> values;
    bool operator==(const SweepSection&) const = default;
};

struct PuppetSection {
    std::int64_t target_item = -1; // -1: lowest-appeal item (ties to lowest id)
    std::uint64_t k = 0;
    std::vector<std::uint64_t> steps; // empty: front-loaded steps 1..k
    bool operator==(const PuppetSection&) const = default;
};

struct DetectorSection {
    std::uint64_t window = 15;
    double threshold = 50.0; // nats
    bool operator==(const DetectorSection&) const = default;
};

struct InjectSection {
    std::uint64_t n_runs = 400;
    std::string condition = "strong";
    PuppetSection puppets;
    DetectorSection detector;
    bool operator==(const InjectSection&) const = default;
};

// One experiment, fully declarative. The mode picks which sections drive the
// run; inactive sections are validated for domain errors but otherwise inert.
struct ExperimentConfig {
    Mode mode = Mode::Urn;
    std::uint64_t master_seed = 0;
    std::string output_dir = "out";
    UrnSection urn;
    MarketSection market;
    SweepSection sweep;
    InjectSection inject;
    bool operator==(const ExperimentConfig&) const = default;
};

// Strict parse of a JSON config: unknown keys are errors, every violation is
// collected (not just the first), syntax errors carry line and column. All
// problems are thrown together as one ConfigError.
ExperimentConfig parse_config(const std::string& text);

// Effective config (defaults applied) as a JSON document; parsing it back
// yields an equal ExperimentConfig.
std::string config_to_json(const ExperimentConfig& config);

} // namespace herdlab
