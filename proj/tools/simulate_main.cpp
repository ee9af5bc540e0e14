#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "herdlab/config.hpp"
#include "herdlab/errors.hpp"
#include "herdlab/runner.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeError = 3;

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic herding-dynamics experiment runner"};
    std::string config_path;
    std::string out_dir;
    int threads = 1;
    std::uint64_t seed_override = 0;
    app.add_option("config", config_path, "JSON experiment config file")->required();
    app.add_option("--out", out_dir, "override the config's output directory");
    app.add_option("--threads", threads, "worker thread count")->check(CLI::PositiveNumber);
    CLI::Option* seed_opt =
        app.add_option("--seed", seed_override, "override the config's master seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfigError;
    }

    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot read config file '" << config_path << "'\n";
        return kExitConfigError;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();

    herdlab::ExperimentConfig config;
    try {
        config = herdlab::parse_config(buffer.str());
    } catch (const herdlab::ConfigError& e) {
        for (const auto& issue : e.issues()) std::cerr << "config error: " << issue << "\n";
        return kExitConfigError;
    }
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (seed_opt->count() > 0) config.master_seed = seed_override;

    try {
        const herdlab::OutputBundle bundle = herdlab::run_experiment(config, threads);
        std::cout << bundle.summary_json;
    } catch (const herdlab::ConfigError& e) {
        for (const auto& issue : e.issues()) std::cerr << "config error: " << issue << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntimeError;
    }
    return 0;
}
