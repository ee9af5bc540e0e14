#include "herdlab/runner.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <openssl/evp.h>

#include "json.hpp"

#include "herdlab/intervention.hpp"
#include "herdlab/market.hpp"
#include "herdlab/metrics.hpp"
#include "herdlab/parallel.hpp"
#include "herdlab/rng.hpp"
#include "herdlab/urn.hpp"

namespace herdlab {

namespace {

using nlohmann::json;

class BundleWriter {
public:
    explicit BundleWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec)
            throw std::runtime_error("cannot create output directory " + dir_.string() + ": " +
                                     ec.message());
    }

    void write(const std::string& name, const std::string& content) {
        const std::filesystem::path path = dir_ / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (out) {
            out.write(content.data(), static_cast<std::streamsize>(content.size()));
            out.flush();
        }
        if (!out) throw std::runtime_error("cannot write " + path.string());
        entries_.push_back({name, sha256_hex(content), content.size()});
    }

    // Every written file, keyed by name, digested; the manifest lists
    // everything except itself.
    void write_manifest() {
        json files = json::object();
        for (const auto& e : entries_)
            files[e.name] = {{"sha256", e.sha256}, {"bytes", e.bytes}};
        json manifest;
        manifest["files"] = files;
        write("manifest.json", manifest.dump(2) + "\n");
    }

    void remove_written() noexcept {
        for (const auto& e : entries_) {
            std::error_code ec;
            std::filesystem::remove(dir_ / e.name, ec);
        }
    }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(entries_.size());
        for (const auto& e : entries_) out.push_back(e.name);
        return out;
    }

private:
    struct Entry {
        std::string name;
        std::string sha256;
        std::size_t bytes;
    };

    std::filesystem::path dir_;
    std::vector<Entry> entries_;
};

MarketConfig market_config_from(const MarketSection& m, std::uint64_t master_seed) {
    MarketConfig mc;
    mc.n_items = m.n_items;
    mc.n_agents = static_cast<std::uint32_t>(m.n_agents);
    mc.policy.alpha = m.alpha;
    mc.policy.beta = m.beta;
    mc.policy.rank_bias = m.rank_bias;
    mc.policy.actions_per_agent = static_cast<std::uint32_t>(m.actions_per_agent);
    mc.appeal_low = m.appeal_low;
    mc.appeal_high = m.appeal_high;
    mc.conditions.clear();
    for (const auto& name : m.conditions) mc.conditions.push_back(condition_from_name(name));
    mc.worlds_per_condition = m.worlds_per_condition;
    mc.master_seed = master_seed;
    return mc;
}

std::vector<SharePoint> decimate(const std::vector<SharePoint>& points, std::uint64_t k) {
    if (points.empty()) return {};
    std::vector<SharePoint> out;
    const std::uint64_t last = points.back().step;
    for (const auto& p : points)
        if (p.step % k == 0 || p.step == last) out.push_back(p);
    return out;
}

json metrics_to_json(const ConditionMetrics& m) {
    json curve = json::array();
    for (const auto& p : m.prediction_curve.points)
        curve.push_back({{"f", p.f}, {"accuracy", p.accuracy}, {"n", p.n_worlds}});
    return {{"gini_mean", m.gini_mean},
            {"unpredictability_U", m.unpredictability_U},
            {"ex_ante_spearman", m.ex_ante_spearman},
            {"rigidity", m.rigidity},
            {"prediction_curve", curve}};
}

std::string trace_file_name(const std::string& condition, std::size_t world) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "_w%03zu.csv", world);
    return "trace_" + condition + buf;
}

std::string trace_to_csv(const RealizationTrace& trace, const std::string& condition,
                         std::size_t world_id) {
    std::string csv =
        "condition,world_id,step,agent_id,item_id,signal_shown,rating,downloaded,is_puppet\n";
    csv.reserve(csv.size() + trace.events.size() * 48);
    const std::string prefix = condition + "," + std::to_string(world_id) + ",";
    for (const auto& e : trace.events) {
        csv += prefix;
        csv += std::to_string(e.step);
        csv += ',';
        csv += std::to_string(e.agent_id);
        csv += ',';
        csv += std::to_string(e.item_id);
        csv += ',';
        csv += format_number(e.signal_shown);
        csv += ',';
        csv += std::to_string(e.rating);
        csv += ',';
        csv += e.downloaded ? '1' : '0';
        csv += ',';
        csv += e.is_puppet ? '1' : '0';
        csv += '\n';
    }
    return csv;
}

json run_urn_mode(const ExperimentConfig& cfg, int threads, BundleWriter& writer) {
    const UrnSection& u = cfg.urn;
    UrnState initial;
    initial.counts = u.initial_counts;
    UrnRule rule;
    rule.gamma = u.gamma;
    rule.increment = u.increment;

    const std::size_t n_runs = u.n_runs;
    std::vector<std::vector<SharePoint>> rows(n_runs);
    std::vector<double> finals(n_runs);
    parallel_for_index(n_runs, threads, [&](std::size_t r) {
        const ShareTrajectory traj =
            run_urn(initial, rule, u.steps, rng::derive_seed(cfg.master_seed, r));
        rows[r] = decimate(traj.points, u.decimation);
        finals[r] = traj.points.back().share;
    });

    std::string csv = "run_id,step,share_color0\n";
    for (std::size_t r = 0; r < n_runs; ++r)
        for (const auto& p : rows[r])
            csv += std::to_string(r) + "," + std::to_string(p.step) + "," +
                   format_number(p.share) + "\n";
    writer.write("trajectories.csv", csv);

    json metrics;
    metrics["initial_share"] = share0(initial);
    metrics["n_runs"] = n_runs;
    metrics["ks_uniform"] = ks_uniform_statistic(finals);
    if (n_runs >= 2)
        metrics["martingale_residual"] = martingale_residual(share0(initial), finals);
    else
        metrics["martingale_residual"] = nullptr;
    writer.write("metrics.json", metrics.dump(2) + "\n");
    return metrics;
}

json world_set_metrics(const WorldSet& set, const MarketSection& m) {
    json metrics = json::object();
    for (const auto& cw : set.conditions)
        metrics[condition_name(cw.condition)] = metrics_to_json(compute_condition_metrics(
            set, cw.condition, m.prediction_fractions, static_cast<int>(m.rigidity_bins)));
    return metrics;
}

json run_market_mode(const ExperimentConfig& cfg, int threads, BundleWriter& writer) {
    const WorldSet set = run_world_set(market_config_from(cfg.market, cfg.master_seed), threads);
    if (cfg.market.write_traces) {
        for (const auto& cw : set.conditions) {
            const std::string cname = condition_name(cw.condition);
            for (std::size_t w = 0; w < cw.worlds.size(); ++w)
                writer.write(trace_file_name(cname, w), trace_to_csv(cw.worlds[w], cname, w));
        }
    }
    const json metrics = world_set_metrics(set, cfg.market);
    writer.write("metrics.json", metrics.dump(2) + "\n");
    return metrics;
}

json run_sweep_mode(const ExperimentConfig& cfg, int threads, BundleWriter& writer) {
    json results = json::array();
    if (cfg.sweep.parameter == "gamma") {
        UrnState initial;
        initial.counts = cfg.urn.initial_counts;
        for (double value : cfg.sweep.values) {
            UrnRule rule;
            rule.gamma = value;
            rule.increment = cfg.urn.increment;
            const std::vector<double> finals = final_share_ensemble(
                initial, rule, cfg.urn.steps, cfg.urn.n_runs, cfg.master_seed, threads);
            double mean = 0.0;
            for (double f : finals) mean += f;
            mean /= static_cast<double>(finals.size());
            double var = 0.0;
            for (double f : finals) var += (f - mean) * (f - mean);
            var /= static_cast<double>(finals.size());
            results.push_back({{"value", value},
                               {"mean_final_share", mean},
                               {"var_final_share", var},
                               {"ks_uniform", ks_uniform_statistic(finals)},
                               {"martingale_residual",
                                martingale_residual(share0(initial), finals)}});
        }
    } else {
        for (double value : cfg.sweep.values) {
            MarketSection m = cfg.market;
            if (cfg.sweep.parameter == "alpha")
                m.alpha = value;
            else if (cfg.sweep.parameter == "beta")
                m.beta = value;
            else
                m.rank_bias = value;
            const WorldSet set = run_world_set(market_config_from(m, cfg.master_seed), threads);
            results.push_back({{"value", value}, {"conditions", world_set_metrics(set, m)}});
        }
    }
    json sweep;
    sweep["parameter"] = cfg.sweep.parameter;
    sweep["values"] = cfg.sweep.values;
    sweep["results"] = results;
    writer.write("sweep.json", sweep.dump(2) + "\n");
    return sweep;
}

json run_inject_mode(const ExperimentConfig& cfg, int threads, BundleWriter& writer) {
    const MarketConfig mc = market_config_from(cfg.market, cfg.master_seed);
    const std::vector<double> appeals = draw_appeals(mc);

    std::uint32_t target = 0;
    if (cfg.inject.puppets.target_item >= 0) {
        target = static_cast<std::uint32_t>(cfg.inject.puppets.target_item);
        if (target >= appeals.size())
            throw std::invalid_argument("inject: target_item is not an item id");
    } else {
        for (std::size_t i = 1; i < appeals.size(); ++i)
            if (appeals[i] < appeals[target]) target = static_cast<std::uint32_t>(i);
    }

    PuppetSchedule schedule;
    schedule.target_item = target;
    schedule.steps = cfg.inject.puppets.steps.empty()
                         ? front_loaded_schedule(target, cfg.inject.puppets.k).steps
                         : cfg.inject.puppets.steps;

    MarketParams params;
    params.appeals = appeals;
    params.n_agents = mc.n_agents;
    params.policy = mc.policy;
    const InfluenceCondition condition = condition_from_name(cfg.inject.condition);
    const std::size_t n_runs = cfg.inject.n_runs;
    const std::size_t window = cfg.inject.detector.window;
    const double threshold = cfg.inject.detector.threshold;

    std::vector<std::uint8_t> base_win(n_runs, 0), treat_win(n_runs, 0);
    std::vector<std::uint8_t> base_flagged(n_runs, 0), treat_hit(n_runs, 0);
    parallel_for_index(n_runs, threads, [&](std::size_t r) {
        const std::uint64_t seed = rng::derive_seed(cfg.master_seed, r);
        const RealizationTrace base = run_realization(params, condition, seed);
        const RealizationTrace treat = run_realization(params, condition, seed, &schedule);
        base_win[r] = final_top_item(base) == target ? 1 : 0;
        treat_win[r] = final_top_item(treat) == target ? 1 : 0;
        const DetectionReport base_report = detect_bursts(params, base, window, threshold);
        base_flagged[r] = base_report.flagged.empty() ? 0 : 1;
        const DetectionReport treat_report = detect_bursts(params, treat, window, threshold);
        for (const auto& flag : treat_report.flagged) {
            if (flag.item != target) continue;
            const auto it = std::lower_bound(schedule.steps.begin(), schedule.steps.end(),
                                             flag.window_start);
            if (it != schedule.steps.end() && *it <= flag.window_end) {
                treat_hit[r] = 1;
                break;
            }
        }
    });

    auto rate = [n_runs](const std::vector<std::uint8_t>& v) {
        std::uint64_t total = 0;
        for (std::uint8_t b : v) total += b;
        return static_cast<double>(total) / static_cast<double>(n_runs);
    };
    const double baseline = rate(base_win);
    const double treated = rate(treat_win);

    json report;
    report["condition"] = cfg.inject.condition;
    report["target_item"] = target;
    report["target_appeal"] = appeals[target];
    report["k"] = schedule.steps.size();
    report["puppet_steps"] = schedule.steps;
    report["win_shift"] = {{"baseline", baseline},
                           {"treated", treated},
                           {"delta", treated - baseline}};
    report["detection"] = {{"window", window},
                           {"threshold", threshold},
                           {"recall", rate(treat_hit)},
                           {"false_flag_rate", rate(base_flagged)},
                           {"n_runs", n_runs}};
    writer.write("inject.json", report.dump(2) + "\n");
    return report;
}

} // namespace

std::string format_number(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xF];
    }
    return out;
}

OutputBundle run_experiment(const ExperimentConfig& config, int threads) {
    BundleWriter writer{std::filesystem::path(config.output_dir)};
    json summary;
    try {
        writer.write("config_effective.json", config_to_json(config));
        switch (config.mode) {
            case Mode::Urn:
                summary["metrics"] = run_urn_mode(config, threads, writer);
                break;
            case Mode::Market:
                summary["metrics"] = run_market_mode(config, threads, writer);
                break;
            case Mode::Sweep:
                summary["sweep"] = run_sweep_mode(config, threads, writer);
                break;
            case Mode::Inject:
                summary["inject"] = run_inject_mode(config, threads, writer);
                break;
        }
        writer.write_manifest();
    } catch (...) {
        writer.remove_written();
        throw;
    }

    OutputBundle bundle;
    bundle.directory = config.output_dir;
    bundle.files = writer.names();
    summary["mode"] = mode_name(config.mode);
    summary["output_dir"] = config.output_dir;
    summary["files"] = bundle.files;
    bundle.summary_json = summary.dump(2) + "\n";
    return bundle;
}

} // namespace herdlab
