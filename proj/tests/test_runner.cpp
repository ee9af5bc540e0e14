#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <system_error>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "herdlab/config.hpp"
#include "herdlab/runner.hpp"

using namespace herdlab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "herdlab_runner_tests" / name;
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::map<std::string, std::string> read_bundle(const fs::path& dir,
                                               const std::vector<std::string>& names) {
    std::map<std::string, std::string> bytes;
    for (const auto& name : names) bytes[name] = slurp(dir / name);
    return bytes;
}

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

} // namespace

TEST_CASE("format_number round-trips doubles through text") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(2.0) == "2");
    for (double v : {1.0 / 3.0, 0.05, 1e-9, 1e300, 0.1 + 0.2, 123456.789, 5e-324}) {
        const auto text = format_number(v);
        double parsed = 0.0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), parsed);
        CHECK(res.ec == std::errc());
        CHECK(parsed == v);
    }
}

TEST_CASE("sha256_hex matches the published test vectors") {
    CHECK(sha256_hex("") ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("urn mode writes decimated trajectories and ensemble metrics") {
    ExperimentConfig cfg;
    cfg.mode = Mode::Urn;
    cfg.master_seed = 7;
    cfg.urn.steps = 105;
    cfg.urn.n_runs = 3;
    cfg.urn.decimation = 10;
    const auto dir = fresh_dir("urn");
    cfg.output_dir = dir.string();
    const auto bundle = run_experiment(cfg);

    // steps 10,20,...,100 plus the final step 105 for each of the 3 runs
    const auto csv = slurp(dir / "trajectories.csv");
    CHECK(count_lines(csv) == 1 + 3 * 11);
    CHECK(csv.rfind("run_id,step,share_color0\n", 0) == 0);

    const auto metrics = json::parse(slurp(dir / "metrics.json"));
    CHECK(metrics.at("initial_share").get<double>() == 0.5);
    CHECK(metrics.at("n_runs").get<int>() == 3);
    CHECK(metrics.at("ks_uniform").is_number());
    CHECK(metrics.at("martingale_residual").is_number());
    CHECK(bundle.files.back() == "manifest.json");
}

TEST_CASE("a single-run urn ensemble reports a null residual") {
    ExperimentConfig cfg;
    cfg.mode = Mode::Urn;
    cfg.urn.steps = 50;
    cfg.urn.n_runs = 1;
    const auto dir = fresh_dir("urn_single");
    cfg.output_dir = dir.string();
    run_experiment(cfg);
    const auto metrics = json::parse(slurp(dir / "metrics.json"));
    CHECK(metrics.at("martingale_residual").is_null());
}

TEST_CASE("market mode writes one trace per world plus a metrics report") {
    ExperimentConfig cfg;
    cfg.mode = Mode::Market;
    cfg.master_seed = 5;
    cfg.market.n_items = 6;
    cfg.market.n_agents = 120;
    cfg.market.worlds_per_condition = 2;
    cfg.market.conditions = {"independent", "strong"};
    cfg.market.prediction_fractions = {0.1, 1.0};
    const auto dir = fresh_dir("market");
    cfg.output_dir = dir.string();
    const auto bundle = run_experiment(cfg);

    const std::vector<std::string> expected = {
        "config_effective.json",        "trace_independent_w000.csv",
        "trace_independent_w001.csv",   "trace_strong_w000.csv",
        "trace_strong_w001.csv",        "metrics.json",
        "manifest.json"};
    CHECK(bundle.files == expected);

    const auto trace = slurp(dir / "trace_strong_w001.csv");
    CHECK(trace.rfind("condition,world_id,step,agent_id,item_id,signal_shown,rating,"
                      "downloaded,is_puppet\n",
                      0) == 0);
    CHECK(count_lines(trace) == 1 + 120);

    const auto metrics = json::parse(slurp(dir / "metrics.json"));
    for (const char* cond : {"independent", "strong"}) {
        const auto& block = metrics.at(cond);
        CHECK(block.at("gini_mean").is_number());
        CHECK(block.at("unpredictability_U").is_number());
        CHECK(block.at("ex_ante_spearman").is_number());
        CHECK(block.at("rigidity").is_number());
        CHECK(block.at("prediction_curve").size() == 2);
        CHECK(block.at("prediction_curve")[0].at("f").get<double>() == 0.1);
        CHECK(block.at("prediction_curve")[0].at("n").is_number());
    }
}

TEST_CASE("trace files can be switched off") {
    ExperimentConfig cfg;
    cfg.mode = Mode::Market;
    cfg.market.n_items = 4;
    cfg.market.n_agents = 60;
    cfg.market.worlds_per_condition = 2;
    cfg.market.conditions = {"weak"};
    cfg.market.write_traces = false;
    const auto dir = fresh_dir("market_notrace");
    cfg.output_dir = dir.string();
    const auto bundle = run_experiment(cfg);
    const std::vector<std::string> expected = {"config_effective.json", "metrics.json",
                                               "manifest.json"};
    CHECK(bundle.files == expected);
}

TEST_CASE("the manifest lists every other file with its exact digest") {
    ExperimentConfig cfg;
    cfg.mode = Mode::Urn;
    cfg.urn.steps = 40;
    cfg.urn.n_runs = 2;
    const auto dir = fresh_dir("manifest");
    cfg.output_dir = dir.string();
    const auto bundle = run_experiment(cfg);

    const auto manifest = json::parse(slurp(dir / "manifest.json"));
    const auto& files = manifest.at("files");
    CHECK(files.size() == bundle.files.size() - 1);
    CHECK_FALSE(files.contains("manifest.json"));
    for (const auto& name : bundle.files) {
        if (name == "manifest.json") continue;
        const auto body = slurp(dir / name);
        CHECK(files.at(name).at("sha256").get<std::string>() == sha256_hex(body));
        CHECK(files.at(name).at("bytes").get<std::size_t>() == body.size());
    }
}

TEST_CASE("reruns and thread counts leave the bundle byte-identical") {
    ExperimentConfig cfg;
    cfg.mode = Mode::Market;
    cfg.master_seed = 99;
    cfg.market.n_items = 5;
    cfg.market.n_agents = 80;
    cfg.market.worlds_per_condition = 2;
    cfg.market.prediction_fractions = {0.5, 1.0};
    const auto dir = fresh_dir("determinism");
    cfg.output_dir = dir.string();

    const auto first = run_experiment(cfg, 1);
    const auto bytes1 = read_bundle(dir, first.files);
    const auto second = run_experiment(cfg, 1);
    CHECK(second.files == first.files);
    CHECK(read_bundle(dir, second.files) == bytes1);
    const auto threaded = run_experiment(cfg, 4);
    CHECK(threaded.files == first.files);
    CHECK(read_bundle(dir, threaded.files) == bytes1);
    CHECK(threaded.summary_json == first.summary_json);
}

TEST_CASE("sweep mode emits one result block per value") {
    ExperimentConfig cfg;
    cfg.mode = Mode::Sweep;
    cfg.master_seed = 31;
    cfg.sweep.parameter = "beta";
    cfg.sweep.values = {0.0, 1.0};
    cfg.market.n_items = 5;
    cfg.market.n_agents = 80;
    cfg.market.worlds_per_condition = 2;
    cfg.market.conditions = {"strong"};
    cfg.market.prediction_fractions = {0.5, 1.0};
    const auto dir = fresh_dir("sweep");
    cfg.output_dir = dir.string();
    run_experiment(cfg);

    const auto sweep = json::parse(slurp(dir / "sweep.json"));
    CHECK(sweep.at("parameter") == "beta");
    CHECK(sweep.at("values").size() == 2);
    REQUIRE(sweep.at("results").size() == 2);
    for (const auto& block : sweep.at("results")) {
        CHECK(block.at("value").is_number());
        CHECK(block.at("conditions").contains("strong"));
    }
}

TEST_CASE("gamma sweeps report urn ensemble statistics") {
    ExperimentConfig cfg;
    cfg.mode = Mode::Sweep;
    cfg.master_seed = 17;
    cfg.sweep.parameter = "gamma";
    cfg.sweep.values = {1.0, 1.5};
    cfg.urn.steps = 200;
    cfg.urn.n_runs = 20;
    const auto dir = fresh_dir("sweep_gamma");
    cfg.output_dir = dir.string();
    run_experiment(cfg);

    const auto sweep = json::parse(slurp(dir / "sweep.json"));
    REQUIRE(sweep.at("results").size() == 2);
    for (const auto& block : sweep.at("results")) {
        CHECK(block.at("mean_final_share").is_number());
        CHECK(block.at("var_final_share").is_number());
        CHECK(block.at("ks_uniform").is_number());
        CHECK(block.at("martingale_residual").is_number());
    }
}

TEST_CASE("inject mode reports the lift and the detector sweep") {
    ExperimentConfig cfg;
    cfg.mode = Mode::Inject;
    cfg.master_seed = 1000;
    cfg.market.n_items = 8;
    cfg.market.n_agents = 150;
    cfg.inject.n_runs = 10;
    cfg.inject.condition = "strong";
    cfg.inject.puppets.target_item = 5;
    cfg.inject.puppets.k = 3;
    const auto dir = fresh_dir("inject");
    cfg.output_dir = dir.string();
    run_experiment(cfg);

    const auto inject = json::parse(slurp(dir / "inject.json"));
    CHECK(inject.at("condition") == "strong");
    CHECK(inject.at("target_item").get<int>() == 5);
    CHECK(inject.at("target_appeal").is_number());
    CHECK(inject.at("k").get<int>() == 3);
    CHECK(inject.at("puppet_steps") == json::array({1, 2, 3}));
    CHECK(inject.at("win_shift").at("baseline").is_number());
    CHECK(inject.at("win_shift").at("treated").is_number());
    CHECK(inject.at("win_shift").at("delta").is_number());
    const auto& det = inject.at("detection");
    CHECK(det.at("window").get<int>() == 15);
    CHECK(det.at("threshold").get<double>() == 50.0);
    CHECK(det.at("recall").is_number());
    CHECK(det.at("false_flag_rate").is_number());
    CHECK(det.at("n_runs").get<int>() == 10);
}

TEST_CASE("an explicit negative target resolves to the lowest-appeal item") {
    ExperimentConfig cfg;
    cfg.mode = Mode::Inject;
    cfg.master_seed = 1001;
    cfg.market.n_items = 8;
    cfg.market.n_agents = 150;
    cfg.inject.n_runs = 6;
    cfg.inject.puppets.target_item = -1;
    cfg.inject.puppets.k = 2;
    const auto dir = fresh_dir("inject_auto");
    cfg.output_dir = dir.string();
    run_experiment(cfg);
    const auto inject = json::parse(slurp(dir / "inject.json"));
    const int target = inject.at("target_item").get<int>();
    CHECK(target >= 0);
    CHECK(target < 8);
    CHECK(inject.at("target_appeal").get<double>() >= 0.2);
    CHECK(inject.at("target_appeal").get<double>() <= 0.8);
}

TEST_CASE("the effective config echo reparses to the same experiment") {
    ExperimentConfig cfg;
    cfg.mode = Mode::Urn;
    cfg.master_seed = 8;
    cfg.urn.steps = 30;
    cfg.urn.n_runs = 2;
    const auto dir = fresh_dir("echo");
    cfg.output_dir = dir.string();
    run_experiment(cfg);
    CHECK(parse_config(slurp(dir / "config_effective.json")) == cfg);
}

TEST_CASE("an impossible output directory fails up front") {
    ExperimentConfig cfg;
    cfg.mode = Mode::Urn;
    cfg.urn.steps = 10;
    cfg.output_dir = "/dev/null/nope";
    CHECK_THROWS(run_experiment(cfg));
}
