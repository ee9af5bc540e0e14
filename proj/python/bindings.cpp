#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "herdlab/config.hpp"
#include "herdlab/errors.hpp"
#include "herdlab/intervention.hpp"
#include "herdlab/market.hpp"
#include "herdlab/metrics.hpp"
#include "herdlab/rng.hpp"
#include "herdlab/runner.hpp"
#include "herdlab/urn.hpp"

namespace py = pybind11;
using namespace herdlab;

namespace {

UrnState make_urn_state(const std::vector<std::uint64_t>& counts) {
    UrnState s;
    s.counts = counts;
    return s;
}

UrnRule make_urn_rule(double gamma, std::uint64_t increment) {
    UrnRule r;
    r.gamma = gamma;
    r.increment = increment;
    return r;
}

AgentPolicy make_policy(double alpha, double beta, double rank_bias,
                        std::uint32_t actions_per_agent) {
    AgentPolicy p;
    p.alpha = alpha;
    p.beta = beta;
    p.rank_bias = rank_bias;
    p.actions_per_agent = actions_per_agent;
    return p;
}

MarketParams make_params(const std::vector<double>& appeals, std::uint32_t n_agents,
                         const AgentPolicy& policy) {
    MarketParams params;
    params.appeals = appeals;
    params.n_agents = n_agents;
    params.policy = policy;
    return params;
}

py::dict trace_to_dict(const RealizationTrace& trace) {
    py::list events;
    for (const auto& e : trace.events)
        events.append(py::make_tuple(e.step, e.agent_id, e.item_id, e.signal_shown, e.rating,
                                     e.downloaded, e.is_puppet));
    py::dict out;
    out["condition"] = condition_name(trace.condition);
    out["world_seed"] = trace.world_seed;
    out["events"] = std::move(events);
    out["final_shares"] = trace.final_shares;
    return out;
}

PuppetSchedule make_schedule(std::uint32_t target, const std::vector<std::uint64_t>& steps,
                             std::size_t k) {
    if (!steps.empty()) {
        PuppetSchedule s;
        s.target_item = target;
        s.steps = steps;
        return s;
    }
    return front_loaded_schedule(target, k);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Seeded herding-dynamics laboratory: reinforcement urns, a cultural "
              "market with graded social influence, predictability metrics, and "
              "fake-user injection/detection.";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    // rng
    m.def("derive_seed", &rng::derive_seed, py::arg("master_seed"), py::arg("stream_id"),
          "Seed for an independent child stream of a master seed.");
    py::class_<rng::Xoshiro256pp>(m, "Rng")
        .def(py::init<std::uint64_t>(), py::arg("seed"))
        .def("next_u64", &rng::Xoshiro256pp::next_u64)
        .def("next_double", &rng::Xoshiro256pp::next_double);

    // urn
    m.def(
        "urn_trajectory",
        [](const std::vector<std::uint64_t>& counts, double gamma, std::uint64_t increment,
           std::uint64_t steps, std::uint64_t seed) {
            const auto traj = run_urn(make_urn_state(counts), make_urn_rule(gamma, increment),
                                      steps, seed);
            std::vector<double> shares;
            shares.reserve(traj.points.size());
            for (const auto& p : traj.points) shares.push_back(p.share);
            return shares;
        },
        py::arg("initial_counts"), py::arg("gamma") = 1.0, py::arg("increment") = 1,
        py::arg("steps") = 1000, py::arg("seed") = 0,
        "Share of color 0 after each step of one seeded urn run.");
    m.def(
        "final_share_ensemble",
        [](const std::vector<std::uint64_t>& counts, double gamma, std::uint64_t increment,
           std::uint64_t steps, std::size_t n_runs, std::uint64_t master_seed, int threads) {
            return final_share_ensemble(make_urn_state(counts), make_urn_rule(gamma, increment),
                                        steps, n_runs, master_seed, threads);
        },
        py::arg("initial_counts"), py::arg("gamma") = 1.0, py::arg("increment") = 1,
        py::arg("steps") = 1000, py::arg("n_runs") = 1, py::arg("master_seed") = 0,
        py::arg("threads") = 1,
        "Final color-0 share of run r for r = 0..n_runs-1, one stream per run.");

    // market primitives
    m.def(
        "social_signal",
        [](std::uint64_t downloads, const std::string& condition, std::size_t display_rank,
           std::size_t n_items, double rank_bias) {
            Item item;
            item.downloads = downloads;
            AgentPolicy policy;
            policy.rank_bias = rank_bias;
            return social_signal(item, condition_from_name(condition), display_rank, n_items,
                                 policy);
        },
        py::arg("downloads"), py::arg("condition"), py::arg("display_rank") = 0,
        py::arg("n_items") = 1, py::arg("rank_bias") = 1.0);
    m.def(
        "choice_probabilities",
        [](const std::vector<double>& appeals, const std::vector<std::uint64_t>& downloads,
           const std::vector<std::uint32_t>& display_order, const std::string& condition,
           double alpha, double beta, double rank_bias) {
            if (appeals.size() != downloads.size())
                throw std::invalid_argument("appeals and downloads differ in length");
            MarketState state;
            for (std::uint32_t i = 0; i < appeals.size(); ++i) {
                Item item;
                item.id = i;
                item.appeal = appeals[i];
                item.downloads = downloads[i];
                state.items.push_back(item);
            }
            state.display_order = display_order;
            return choice_probabilities(state, condition_from_name(condition),
                                        make_policy(alpha, beta, rank_bias, 1));
        },
        py::arg("appeals"), py::arg("downloads"), py::arg("display_order"), py::arg("condition"),
        py::arg("alpha") = 1.0, py::arg("beta") = 1.0, py::arg("rank_bias") = 1.0);
    m.def("simulate_listen", &simulate_listen, py::arg("appeal"), py::arg("u"));
    m.def("download_decision", &download_decision, py::arg("rating"), py::arg("u"));
    m.def("initial_display_order",
          [](std::size_t n_items, const std::string& condition, std::uint64_t world_seed) {
              return initial_display_order(n_items, condition_from_name(condition), world_seed);
          },
          py::arg("n_items"), py::arg("condition"), py::arg("world_seed"));

    // one market world, optionally with scheduled fake users
    m.def(
        "run_realization",
        [](const std::vector<double>& appeals, std::uint32_t n_agents,
           const std::string& condition, std::uint64_t world_seed, double alpha, double beta,
           double rank_bias, std::uint32_t actions_per_agent,
           std::optional<std::uint32_t> puppet_target,
           const std::vector<std::uint64_t>& puppet_steps, std::size_t puppet_k) {
            const auto params = make_params(
                appeals, n_agents, make_policy(alpha, beta, rank_bias, actions_per_agent));
            if (!puppet_target) {
                return trace_to_dict(
                    run_realization(params, condition_from_name(condition), world_seed));
            }
            const auto schedule = make_schedule(*puppet_target, puppet_steps, puppet_k);
            return trace_to_dict(apply_puppets(params, condition_from_name(condition),
                                               world_seed, schedule));
        },
        py::arg("appeals"), py::arg("n_agents"), py::arg("condition"), py::arg("world_seed"),
        py::arg("alpha") = 1.0, py::arg("beta") = 1.0, py::arg("rank_bias") = 1.0,
        py::arg("actions_per_agent") = 1, py::arg("puppet_target") = std::nullopt,
        py::arg("puppet_steps") = std::vector<std::uint64_t>{}, py::arg("puppet_k") = 0,
        "One market world as a dict of events and final shares.");

    // metrics
    m.def("gini", &gini, py::arg("shares"));
    m.def("unpredictability", &unpredictability, py::arg("worlds"));
    m.def("spearman", &spearman, py::arg("x"), py::arg("y"));
    m.def("ks_uniform_statistic", &ks_uniform_statistic, py::arg("samples"));
    m.def("martingale_residual",
          static_cast<double (*)(double, const std::vector<double>&)>(&martingale_residual),
          py::arg("initial_share"), py::arg("finals"));
    m.def("quantile_bins", &quantile_bins, py::arg("values"), py::arg("n_bins") = 8);

    // intervention
    m.def(
        "win_probability_shift",
        [](const std::vector<double>& appeals, std::uint32_t n_agents,
           const std::string& condition, std::uint32_t target,
           const std::vector<std::uint64_t>& puppet_steps, std::size_t puppet_k,
           std::size_t n_runs, std::uint64_t master_seed, double alpha, double beta,
           double rank_bias, int threads) {
            const auto params =
                make_params(appeals, n_agents, make_policy(alpha, beta, rank_bias, 1));
            const auto shift =
                win_probability_shift(params, condition_from_name(condition),
                                      make_schedule(target, puppet_steps, puppet_k), n_runs,
                                      master_seed, threads);
            return py::make_tuple(shift.baseline, shift.treated, shift.delta);
        },
        py::arg("appeals"), py::arg("n_agents"), py::arg("condition"), py::arg("target"),
        py::arg("puppet_steps") = std::vector<std::uint64_t>{}, py::arg("puppet_k") = 0,
        py::arg("n_runs") = 100, py::arg("master_seed") = 0, py::arg("alpha") = 1.0,
        py::arg("beta") = 1.0, py::arg("rank_bias") = 1.0, py::arg("threads") = 1,
        "(baseline, treated, delta) win probability of the target item.");
    m.def(
        "detect_bursts",
        [](const std::vector<double>& appeals, std::uint32_t n_agents,
           const std::string& condition, std::uint64_t world_seed,
           std::optional<std::uint32_t> puppet_target,
           const std::vector<std::uint64_t>& puppet_steps, std::size_t puppet_k,
           std::size_t window, double threshold, double alpha, double beta, double rank_bias) {
            const auto params =
                make_params(appeals, n_agents, make_policy(alpha, beta, rank_bias, 1));
            const auto cond = condition_from_name(condition);
            const auto trace =
                puppet_target
                    ? apply_puppets(params, cond, world_seed,
                                    make_schedule(*puppet_target, puppet_steps, puppet_k))
                    : run_realization(params, cond, world_seed);
            const auto report = detect_bursts(params, trace, window, threshold);
            py::list flags;
            for (const auto& f : report.flagged)
                flags.append(py::make_tuple(f.item, f.window_start, f.window_end, f.surprise));
            return flags;
        },
        py::arg("appeals"), py::arg("n_agents"), py::arg("condition"), py::arg("world_seed"),
        py::arg("puppet_target") = std::nullopt,
        py::arg("puppet_steps") = std::vector<std::uint64_t>{}, py::arg("puppet_k") = 0,
        py::arg("window") = 15, py::arg("threshold") = 50.0, py::arg("alpha") = 1.0,
        py::arg("beta") = 1.0, py::arg("rank_bias") = 1.0,
        "Burst flags (item, window_start, window_end, surprise) on one world.");

    // declarative runner
    m.def(
        "run_config",
        [](const std::string& config_json, std::optional<std::string> output_dir, int threads) {
            auto cfg = parse_config(config_json);
            if (output_dir) cfg.output_dir = *output_dir;
            return run_experiment(cfg, threads).summary_json;
        },
        py::arg("config_json"), py::arg("output_dir") = std::nullopt, py::arg("threads") = 1,
        "Run a declarative experiment config; returns the summary json text.");

    m.attr("__version__") = "0.1.0";
}
