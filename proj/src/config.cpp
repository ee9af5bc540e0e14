#include "herdlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string>

#include "json.hpp"

#include "herdlab/errors.hpp"
#include "herdlab/market.hpp"

namespace herdlab {

namespace {

using nlohmann::json;

struct Issues {
    std::vector<std::string> list;
    void add(const std::string& path, const std::string& problem) {
        list.push_back(path + ": " + problem);
    }
};

std::string join_path(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed, Issues& issues) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::none_of(allowed.begin(), allowed.end(),
                         [&](const char* a) { return it.key() == a; }))
            issues.add(join_path(path, it.key()), "unknown key");
    }
}

void get_u64(const json& obj, const char* key, const std::string& path, Issues& issues,
             std::uint64_t& out, std::uint64_t min_v,
             std::uint64_t max_v = std::numeric_limits<std::uint64_t>::max()) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    const std::string p = join_path(path, key);
    if (!v.is_number_integer() && !v.is_number_unsigned()) {
        issues.add(p, "must be an integer");
        return;
    }
    if (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0) {
        issues.add(p, "must be >= " + std::to_string(min_v));
        return;
    }
    const std::uint64_t u = v.get<std::uint64_t>();
    if (u < min_v || u > max_v) {
        issues.add(p, "must lie in [" + std::to_string(min_v) + ", " + std::to_string(max_v) +
                          "] (got " + std::to_string(u) + ")");
        return;
    }
    out = u;
}

void get_i64(const json& obj, const char* key, const std::string& path, Issues& issues,
             std::int64_t& out, std::int64_t min_v) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    const std::string p = join_path(path, key);
    if (!v.is_number_integer() && !v.is_number_unsigned()) {
        issues.add(p, "must be an integer");
        return;
    }
    const std::int64_t i = v.get<std::int64_t>();
    if (i < min_v) {
        issues.add(p, "must be >= " + std::to_string(min_v) + " (got " + std::to_string(i) + ")");
        return;
    }
    out = i;
}

void get_double(const json& obj, const char* key, const std::string& path, Issues& issues,
                double& out, double min_v, double max_v = std::numeric_limits<double>::max()) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    const std::string p = join_path(path, key);
    if (!v.is_number()) {
        issues.add(p, "must be a number");
        return;
    }
    const double d = v.get<double>();
    if (!std::isfinite(d) || d < min_v || d > max_v) {
        const std::string bound =
            max_v == std::numeric_limits<double>::max()
                ? "must be a finite number >= " + json(min_v).dump()
                : "must lie in [" + json(min_v).dump() + ", " + json(max_v).dump() + "]";
        issues.add(p, bound + " (got " + v.dump() + ")");
        return;
    }
    out = d;
}

void get_bool(const json& obj, const char* key, const std::string& path, Issues& issues,
              bool& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_boolean()) {
        issues.add(join_path(path, key), "must be a boolean");
        return;
    }
    out = v.get<bool>();
}

void get_string(const json& obj, const char* key, const std::string& path, Issues& issues,
                std::string& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    const std::string p = join_path(path, key);
    if (!v.is_string()) {
        issues.add(p, "must be a string");
        return;
    }
    const std::string s = v.get<std::string>();
    if (s.empty()) {
        issues.add(p, "must not be empty");
        return;
    }
    out = s;
}

void parse_urn(const json& obj, Issues& issues, UrnSection& out) {
    check_keys(obj, "urn", {"initial_counts", "gamma", "increment", "steps", "n_runs",
                            "decimation"},
               issues);
    if (obj.contains("initial_counts")) {
        const json& v = obj.at("initial_counts");
        if (!v.is_array() || v.empty()) {
            issues.add("urn.initial_counts", "must be a non-empty array of integers");
        } else {
            std::vector<std::uint64_t> counts;
            bool ok = true;
            for (const auto& e : v) {
                if (!e.is_number_unsigned() ||
                    e.get<std::uint64_t>() < 1) {
                    issues.add("urn.initial_counts", "every count must be an integer >= 1");
                    ok = false;
                    break;
                }
                counts.push_back(e.get<std::uint64_t>());
            }
            if (ok) out.initial_counts = std::move(counts);
        }
    }
    get_double(obj, "gamma", "urn", issues, out.gamma, 0.0);
    get_u64(obj, "increment", "urn", issues, out.increment, 1);
    get_u64(obj, "steps", "urn", issues, out.steps, 1);
    get_u64(obj, "n_runs", "urn", issues, out.n_runs, 1);
    get_u64(obj, "decimation", "urn", issues, out.decimation, 1);
}

void parse_market(const json& obj, Issues& issues, MarketSection& out) {
    check_keys(obj, "market",
               {"n_items", "n_agents", "actions_per_agent", "alpha", "beta", "rank_bias",
                "appeal_low", "appeal_high", "conditions", "worlds_per_condition",
                "prediction_fractions", "rigidity_bins", "write_traces"},
               issues);
    constexpr std::uint64_t kU32Max = std::numeric_limits<std::uint32_t>::max();
    get_u64(obj, "n_items", "market", issues, out.n_items, 2, 1000000);
    get_u64(obj, "n_agents", "market", issues, out.n_agents, 1, kU32Max);
    get_u64(obj, "actions_per_agent", "market", issues, out.actions_per_agent, 1, kU32Max);
    get_double(obj, "alpha", "market", issues, out.alpha, 0.0);
    get_double(obj, "beta", "market", issues, out.beta, 0.0);
    get_double(obj, "rank_bias", "market", issues, out.rank_bias, 0.0);
    get_double(obj, "appeal_low", "market", issues, out.appeal_low, 0.0, 1.0);
    get_double(obj, "appeal_high", "market", issues, out.appeal_high, 0.0, 1.0);
    if (out.appeal_low > out.appeal_high)
        issues.add("market.appeal_low", "must be <= market.appeal_high");
    if (obj.contains("conditions")) {
        const json& v = obj.at("conditions");
        if (!v.is_array() || v.empty()) {
            issues.add("market.conditions", "must be a non-empty array of condition names");
        } else {
            std::vector<std::string> names;
            bool ok = true;
            for (const auto& e : v) {
                if (!e.is_string()) {
                    issues.add("market.conditions", "entries must be strings");
                    ok = false;
                    break;
                }
                const std::string name = e.get<std::string>();
                try {
                    condition_from_name(name);
                } catch (const std::invalid_argument&) {
                    issues.add("market.conditions",
                               "'" + name + "' is not one of independent|weak|strong");
                    ok = false;
                    break;
                }
                if (std::find(names.begin(), names.end(), name) != names.end()) {
                    issues.add("market.conditions", "duplicate entry '" + name + "'");
                    ok = false;
                    break;
                }
                names.push_back(name);
            }
            if (ok) out.conditions = std::move(names);
        }
    }
    get_u64(obj, "worlds_per_condition", "market", issues, out.worlds_per_condition, 1, 100000);
    if (obj.contains("prediction_fractions")) {
        const json& v = obj.at("prediction_fractions");
        if (!v.is_array() || v.empty()) {
            issues.add("market.prediction_fractions", "must be a non-empty array of numbers");
        } else {
            std::vector<double> fracs;
            bool ok = true;
            double prev = 0.0;
            for (const auto& e : v) {
                if (!e.is_number()) {
                    issues.add("market.prediction_fractions", "entries must be numbers");
                    ok = false;
                    break;
                }
                const double f = e.get<double>();
                if (!std::isfinite(f) || f <= prev || f > 1.0) {
                    issues.add("market.prediction_fractions",
                               "entries must be strictly increasing within (0, 1]");
                    ok = false;
                    break;
                }
                prev = f;
                fracs.push_back(f);
            }
            if (ok) out.prediction_fractions = std::move(fracs);
        }
    }
    get_u64(obj, "rigidity_bins", "market", issues, out.rigidity_bins, 2, 4096);
    get_bool(obj, "write_traces", "market", issues, out.write_traces);
}

void parse_sweep(const json& obj, Issues& issues, SweepSection& out) {
    check_keys(obj, "sweep", {"parameter", "values"}, issues);
    get_string(obj, "parameter", "sweep", issues, out.parameter);
    if (out.parameter != "alpha" && out.parameter != "beta" && out.parameter != "rank_bias" &&
        out.parameter != "gamma")
        issues.add("sweep.parameter", "must be one of alpha|beta|rank_bias|gamma");
    if (obj.contains("values")) {
        const json& v = obj.at("values");
        if (!v.is_array()) {
            issues.add("sweep.values", "must be an array of numbers");
        } else {
            std::vector<double> values;
            bool ok = true;
            for (const auto& e : v) {
                if (!e.is_number() || !std::isfinite(e.get<double>()) || e.get<double>() < 0.0) {
                    issues.add("sweep.values", "entries must be finite numbers >= 0");
                    ok = false;
                    break;
                }
                values.push_back(e.get<double>());
            }
            if (ok) out.values = std::move(values);
        }
    }
}

void parse_inject(const json& obj, Issues& issues, InjectSection& out) {
    check_keys(obj, "inject", {"n_runs", "condition", "puppets", "detector"}, issues);
    get_u64(obj, "n_runs", "inject", issues, out.n_runs, 2, 10000000);
    get_string(obj, "condition", "inject", issues, out.condition);
    try {
        condition_from_name(out.condition);
    } catch (const std::invalid_argument&) {
        issues.add("inject.condition", "must be one of independent|weak|strong");
    }
    if (obj.contains("puppets")) {
        const json& p = obj.at("puppets");
        if (!p.is_object()) {
            issues.add("inject.puppets", "must be an object");
        } else {
            check_keys(p, "inject.puppets", {"target_item", "k", "steps"}, issues);
            get_i64(p, "target_item", "inject.puppets", issues, out.puppets.target_item, -1);
            get_u64(p, "k", "inject.puppets", issues, out.puppets.k, 0);
            if (p.contains("steps")) {
                const json& v = p.at("steps");
                if (!v.is_array()) {
                    issues.add("inject.puppets.steps", "must be an array of integers");
                } else {
                    std::vector<std::uint64_t> steps;
                    bool ok = true;
                    std::uint64_t prev = 0;
                    for (const auto& e : v) {
                        if (!e.is_number_unsigned() || e.get<std::uint64_t>() < 1 ||
                            e.get<std::uint64_t>() <= prev) {
                            issues.add("inject.puppets.steps",
                                       "must be strictly increasing integers >= 1");
                            ok = false;
                            break;
                        }
                        prev = e.get<std::uint64_t>();
                        steps.push_back(prev);
                    }
                    if (ok) out.puppets.steps = std::move(steps);
                }
            }
        }
    }
    if (obj.contains("detector")) {
        const json& d = obj.at("detector");
        if (!d.is_object()) {
            issues.add("inject.detector", "must be an object");
        } else {
            check_keys(d, "inject.detector", {"window", "threshold"}, issues);
            get_u64(d, "window", "inject.detector", issues, out.detector.window, 5);
            get_double(d, "threshold", "inject.detector", issues, out.detector.threshold, 0.0);
        }
    }
}

void cross_validate_market(const ExperimentConfig& cfg, Issues& issues) {
    const MarketSection& m = cfg.market;
    if (m.worlds_per_condition < 2)
        issues.add("market.worlds_per_condition",
                   "cross-world dispersion needs at least 2 worlds per condition");
    if (m.appeal_low >= m.appeal_high)
        issues.add("market.appeal_low",
                   "appeal-rank correlation needs appeal_low < appeal_high");
    const std::uint64_t horizon = m.n_agents * m.actions_per_agent;
    if (m.worlds_per_condition * horizon < 100)
        issues.add("market.worlds_per_condition",
                   "rigidity needs at least 100 pooled events per condition");
}

void cross_validate(const ExperimentConfig& cfg, Issues& issues) {
    switch (cfg.mode) {
        case Mode::Urn:
            break;
        case Mode::Market:
            cross_validate_market(cfg, issues);
            break;
        case Mode::Sweep:
            if (cfg.sweep.values.empty())
                issues.add("sweep.values", "required in sweep mode");
            if (cfg.sweep.parameter == "gamma") {
                if (cfg.urn.n_runs < 2)
                    issues.add("urn.n_runs",
                               "gamma sweep reports ensemble diagnostics; need >= 2 runs");
            } else {
                cross_validate_market(cfg, issues);
            }
            break;
        case Mode::Inject: {
            const std::uint64_t horizon = cfg.market.n_agents * cfg.market.actions_per_agent;
            const PuppetSection& p = cfg.inject.puppets;
            if (!p.steps.empty()) {
                if (p.k != 0 && p.k != p.steps.size())
                    issues.add("inject.puppets.k",
                               "does not match the number of listed steps");
                if (p.steps.back() > horizon)
                    issues.add("inject.puppets.steps",
                               "last step exceeds the horizon of " + std::to_string(horizon) +
                                   " events");
            } else if (p.k > horizon) {
                issues.add("inject.puppets.k",
                           "exceeds the horizon of " + std::to_string(horizon) + " events");
            }
            if (p.target_item >= 0 &&
                static_cast<std::uint64_t>(p.target_item) >= cfg.market.n_items)
                issues.add("inject.puppets.target_item", "is not an item id");
            if (cfg.inject.detector.window > horizon)
                issues.add("inject.detector.window", "is longer than the horizon");
            break;
        }
    }
}

} // namespace

std::string mode_name(Mode m) {
    switch (m) {
        case Mode::Urn: return "urn";
        case Mode::Market: return "market";
        case Mode::Sweep: return "sweep";
        case Mode::Inject: return "inject";
    }
    throw std::invalid_argument("unknown mode");
}

Mode mode_from_name(const std::string& name) {
    if (name == "urn") return Mode::Urn;
    if (name == "market") return Mode::Market;
    if (name == "sweep") return Mode::Sweep;
    if (name == "inject") return Mode::Inject;
    throw std::invalid_argument("unknown mode: '" + name + "'");
}

ExperimentConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t upto = std::min(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < upto; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("syntax error at line " + std::to_string(line) + ", column " +
                          std::to_string(col));
    }
    if (!root.is_object()) throw ConfigError("top level: must be a JSON object");

    Issues issues;
    check_keys(root, "",
               {"mode", "master_seed", "output_dir", "urn", "market", "sweep", "inject"},
               issues);

    ExperimentConfig cfg;
    bool mode_known = false;
    if (!root.contains("mode")) {
        issues.add("mode", "required (one of urn|market|sweep|inject)");
    } else if (!root.at("mode").is_string()) {
        issues.add("mode", "must be a string");
    } else {
        try {
            cfg.mode = mode_from_name(root.at("mode").get<std::string>());
            mode_known = true;
        } catch (const std::invalid_argument&) {
            issues.add("mode", "must be one of urn|market|sweep|inject");
        }
    }
    get_u64(root, "master_seed", "", issues, cfg.master_seed, 0);
    get_string(root, "output_dir", "", issues, cfg.output_dir);

    auto section = [&](const char* key, auto&& parser, auto& out) {
        if (!root.contains(key)) return;
        const json& v = root.at(key);
        if (!v.is_object()) {
            issues.add(key, "must be an object");
            return;
        }
        parser(v, issues, out);
    };
    section("urn", [](const json& o, Issues& is, UrnSection& s) { parse_urn(o, is, s); },
            cfg.urn);
    section("market",
            [](const json& o, Issues& is, MarketSection& s) { parse_market(o, is, s); },
            cfg.market);
    section("sweep", [](const json& o, Issues& is, SweepSection& s) { parse_sweep(o, is, s); },
            cfg.sweep);
    section("inject",
            [](const json& o, Issues& is, InjectSection& s) { parse_inject(o, is, s); },
            cfg.inject);

    if (mode_known) cross_validate(cfg, issues);
    if (!issues.list.empty()) throw ConfigError(std::move(issues.list));
    return cfg;
}

std::string config_to_json(const ExperimentConfig& config) {
    json root;
    root["mode"] = mode_name(config.mode);
    root["master_seed"] = config.master_seed;
    root["output_dir"] = config.output_dir;
    root["urn"] = {{"initial_counts", config.urn.initial_counts},
                   {"gamma", config.urn.gamma},
                   {"increment", config.urn.increment},
                   {"steps", config.urn.steps},
                   {"n_runs", config.urn.n_runs},
                   {"decimation", config.urn.decimation}};
    root["market"] = {{"n_items", config.market.n_items},
                      {"n_agents", config.market.n_agents},
                      {"actions_per_agent", config.market.actions_per_agent},
                      {"alpha", config.market.alpha},
                      {"beta", config.market.beta},
                      {"rank_bias", config.market.rank_bias},
                      {"appeal_low", config.market.appeal_low},
                      {"appeal_high", config.market.appeal_high},
                      {"conditions", config.market.conditions},
                      {"worlds_per_condition", config.market.worlds_per_condition},
                      {"prediction_fractions", config.market.prediction_fractions},
                      {"rigidity_bins", config.market.rigidity_bins},
                      {"write_traces", config.market.write_traces}};
    root["sweep"] = {{"parameter", config.sweep.parameter}, {"values", config.sweep.values}};
    root["inject"] = {{"n_runs", config.inject.n_runs},
                      {"condition", config.inject.condition},
                      {"puppets",
                       {{"target_item", config.inject.puppets.target_item},
                        {"k", config.inject.puppets.k},
                        {"steps", config.inject.puppets.steps}}},
                      {"detector",
                       {{"window", config.inject.detector.window},
                        {"threshold", config.inject.detector.threshold}}}};
    return root.dump(2) + "\n";
}

} // namespace herdlab
