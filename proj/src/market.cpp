#include "herdlab/market.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "herdlab/errors.hpp"
#include "herdlab/parallel.hpp"
#include "herdlab/rng.hpp"

namespace herdlab {

namespace {

void validate_policy(const AgentPolicy& policy) {
    auto check = [](double v, const char* name) {
        if (!std::isfinite(v) || v < 0.0)
            throw std::invalid_argument(std::string("agent policy: ") + name +
                                        " must be finite and >= 0");
    };
    check(policy.alpha, "alpha");
    check(policy.beta, "beta");
    check(policy.rank_bias, "rank_bias");
    if (policy.actions_per_agent < 1)
        throw std::invalid_argument("agent policy: actions_per_agent must be >= 1");
}

void validate_appeals(const std::vector<double>& appeals) {
    if (appeals.empty())
        throw std::invalid_argument("market: at least one item is required");
    for (double a : appeals)
        if (!std::isfinite(a) || a < 0.0 || a > 1.0)
            throw std::invalid_argument("market: appeals must lie in [0, 1]");
}

void validate_puppets(const PuppetSchedule& schedule, std::size_t n_items,
                      std::uint64_t horizon) {
    if (schedule.target_item >= n_items)
        throw ConfigError("puppet schedule: target_item " +
                          std::to_string(schedule.target_item) + " is not an item id");
    std::uint64_t prev = 0;
    for (std::uint64_t s : schedule.steps) {
        if (s < 1 || s <= prev)
            throw ConfigError("puppet schedule: steps must be strictly increasing and >= 1");
        if (s > horizon)
            throw ConfigError("puppet schedule: step " + std::to_string(s) +
                              " is beyond the horizon of " + std::to_string(horizon) + " events");
        prev = s;
    }
}

// Same boundary convention as the urn sampler: first index whose cumulative
// probability is >= u, an exact edge hit going to the lower index.
std::size_t pick_from_probabilities(const std::vector<double>& probs, double u) {
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
        cum += probs[i];
        if (u <= cum) return i;
    }
    return probs.size() - 1;
}

} // namespace

std::string condition_name(InfluenceCondition c) {
    switch (c) {
        case InfluenceCondition::Independent: return "independent";
        case InfluenceCondition::Weak: return "weak";
        case InfluenceCondition::Strong: return "strong";
    }
    throw std::invalid_argument("unknown influence condition");
}

InfluenceCondition condition_from_name(const std::string& name) {
    if (name == "independent") return InfluenceCondition::Independent;
    if (name == "weak") return InfluenceCondition::Weak;
    if (name == "strong") return InfluenceCondition::Strong;
    throw std::invalid_argument("unknown influence condition: '" + name + "'");
}

PuppetSchedule front_loaded_schedule(std::uint32_t target_item, std::size_t k) {
    PuppetSchedule schedule;
    schedule.target_item = target_item;
    schedule.steps.reserve(k);
    for (std::size_t s = 1; s <= k; ++s) schedule.steps.push_back(s);
    return schedule;
}

std::vector<double> draw_appeals(const MarketConfig& config) {
    if (config.n_items < 1)
        throw std::invalid_argument("market: n_items must be >= 1");
    if (!(config.appeal_low >= 0.0 && config.appeal_high <= 1.0 &&
          config.appeal_low <= config.appeal_high))
        throw std::invalid_argument("market: appeal bounds must satisfy 0 <= low <= high <= 1");
    rng::Xoshiro256pp gen(rng::derive_seed(config.master_seed, rng::kAppealStream));
    std::vector<double> appeals(config.n_items);
    for (auto& a : appeals)
        a = config.appeal_low + (config.appeal_high - config.appeal_low) * gen.next_double();
    return appeals;
}

std::vector<std::uint32_t> initial_display_order(std::size_t n_items,
                                                 InfluenceCondition condition,
                                                 std::uint64_t world_seed) {
    if (n_items < 1)
        throw std::invalid_argument("market: at least one item is required");
    std::vector<std::uint32_t> order(n_items);
    for (std::size_t i = 0; i < n_items; ++i) order[i] = static_cast<std::uint32_t>(i);
    if (condition == InfluenceCondition::Weak) {
        rng::Xoshiro256pp gen(rng::derive_seed(world_seed, 0));
        for (std::size_t i = n_items - 1; i > 0; --i) {
            const std::size_t j =
                static_cast<std::size_t>(gen.next_double() * static_cast<double>(i + 1));
            std::swap(order[i], order[std::min(j, i)]);
        }
    }
    return order;
}

double social_signal(const Item& item, InfluenceCondition condition,
                     std::size_t display_rank, std::size_t n_items,
                     const AgentPolicy& policy) {
    if (display_rank >= n_items)
        throw std::invalid_argument("social_signal: display_rank out of range");
    switch (condition) {
        case InfluenceCondition::Independent:
            return 0.0;
        case InfluenceCondition::Weak:
            return std::log1p(static_cast<double>(item.downloads));
        case InfluenceCondition::Strong:
            return std::log1p(static_cast<double>(item.downloads)) +
                   policy.rank_bias * std::log(static_cast<double>(n_items) /
                                               static_cast<double>(1 + display_rank));
    }
    throw std::invalid_argument("unknown influence condition");
}

std::vector<double> choice_probabilities(const MarketState& state, InfluenceCondition condition,
                                         const AgentPolicy& policy) {
    const std::size_t n = state.items.size();
    if (n == 0)
        throw std::invalid_argument("choice_probabilities: no items");
    if (state.display_order.size() != n)
        throw std::invalid_argument("choice_probabilities: display_order must permute all items");

    std::vector<std::size_t> rank_of(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        const std::uint32_t id = state.display_order[r];
        if (id >= n || rank_of[id] != n)
            throw std::invalid_argument(
                "choice_probabilities: display_order must permute all items");
        rank_of[id] = r;
    }

    std::vector<double> utility(n);
    double max_utility = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const Item& item = state.items[i];
        const double signal = social_signal(item, condition, rank_of[item.id], n, policy);
        utility[i] = policy.alpha * item.appeal + policy.beta * signal;
        max_utility = std::max(max_utility, utility[i]);
    }
    std::vector<double> probs(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        probs[i] = std::exp(utility[i] - max_utility);
        sum += probs[i];
    }
    for (auto& p : probs) p /= sum;
    return probs;
}

int simulate_listen(double appeal, double u) {
    if (!std::isfinite(appeal) || appeal < 0.0 || appeal > 1.0)
        throw std::invalid_argument("simulate_listen: appeal must lie in [0, 1]");
    const double p = appeal;
    const double q = 1.0 - p;
    const double pmf[5] = {q * q * q * q, 4.0 * p * q * q * q, 6.0 * p * p * q * q,
                           4.0 * p * p * p * q, p * p * p * p};
    double cdf = 0.0;
    for (int k = 0; k < 4; ++k) {
        cdf += pmf[k];
        if (u < cdf) return 1 + k;
    }
    return 5;
}

bool download_decision(int rating, double u) {
    if (rating < 1 || rating > 5)
        throw std::invalid_argument("download_decision: rating must lie in 1..5");
    return u < static_cast<double>(rating - 1) / 4.0;
}

LeaderBoard::LeaderBoard(std::size_t n_items)
    : order_(n_items), position_(n_items), downloads_(n_items, 0) {
    for (std::size_t i = 0; i < n_items; ++i) {
        order_[i] = static_cast<std::uint32_t>(i);
        position_[i] = i;
    }
}

void LeaderBoard::record_download(std::uint32_t item) {
    ++downloads_[item];
    std::size_t pos = position_[item];
    while (pos > 0) {
        const std::uint32_t ahead = order_[pos - 1];
        const bool overtakes = downloads_[item] > downloads_[ahead] ||
                               (downloads_[item] == downloads_[ahead] && item < ahead);
        if (!overtakes) break;
        order_[pos - 1] = item;
        order_[pos] = ahead;
        position_[ahead] = pos;
        --pos;
    }
    position_[item] = pos;
}

RealizationTrace run_realization(const MarketParams& params, InfluenceCondition condition,
                                 std::uint64_t world_seed, const PuppetSchedule* puppets) {
    validate_appeals(params.appeals);
    validate_policy(params.policy);
    const std::size_t n = params.appeals.size();
    const std::uint64_t horizon =
        static_cast<std::uint64_t>(params.n_agents) * params.policy.actions_per_agent;
    if (horizon < 1)
        throw std::invalid_argument("market: n_agents * actions_per_agent must be >= 1");
    if (puppets) validate_puppets(*puppets, n, horizon);

    MarketState state;
    state.items.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        state.items.push_back({static_cast<std::uint32_t>(i), params.appeals[i], 0});
    state.display_order = initial_display_order(n, condition, world_seed);

    LeaderBoard board(n);
    RealizationTrace trace;
    trace.condition = condition;
    trace.world_seed = world_seed;
    trace.events.reserve(horizon);

    std::size_t next_puppet = 0;
    std::uint64_t total_downloads = 0;

    for (std::uint64_t e = 1; e <= horizon; ++e) {
        TraceEvent event;
        event.step = e;
        event.agent_id = static_cast<std::uint32_t>((e - 1) / params.policy.actions_per_agent);

        if (condition == InfluenceCondition::Strong) state.display_order = board.order();

        const bool puppet_turn = puppets && next_puppet < puppets->steps.size() &&
                                 puppets->steps[next_puppet] == e;
        if (puppet_turn) {
            ++next_puppet;
            const std::uint32_t target = puppets->target_item;
            std::size_t rank = 0;
            for (std::size_t r = 0; r < n; ++r)
                if (state.display_order[r] == target) { rank = r; break; }
            event.item_id = target;
            event.signal_shown =
                social_signal(state.items[target], condition, rank, n, params.policy);
            event.rating = 5;
            event.downloaded = true;
            event.is_puppet = true;
        } else {
            rng::Xoshiro256pp gen(rng::derive_seed(world_seed, e));
            const std::vector<double> probs = choice_probabilities(state, condition, params.policy);
            const std::size_t chosen = pick_from_probabilities(probs, gen.next_double());
            std::size_t rank = 0;
            for (std::size_t r = 0; r < n; ++r)
                if (state.display_order[r] == static_cast<std::uint32_t>(chosen)) { rank = r; break; }
            event.item_id = static_cast<std::uint32_t>(chosen);
            event.signal_shown =
                social_signal(state.items[chosen], condition, rank, n, params.policy);
            event.rating = simulate_listen(params.appeals[chosen], gen.next_double());
            event.downloaded = download_decision(event.rating, gen.next_double());
        }

        if (event.downloaded) {
            state.items[event.item_id].downloads += 1;
            board.record_download(event.item_id);
            ++total_downloads;
        }
        state.step = e;
        trace.events.push_back(event);
    }

    trace.final_shares.assign(n, 0.0);
    if (total_downloads > 0)
        for (std::size_t i = 0; i < n; ++i)
            trace.final_shares[i] = static_cast<double>(state.items[i].downloads) /
                                    static_cast<double>(total_downloads);
    return trace;
}

WorldSet run_world_set(const MarketConfig& config, int threads) {
    if (config.worlds_per_condition < 1)
        throw std::invalid_argument("market: worlds_per_condition must be >= 1");
    if (config.conditions.empty())
        throw std::invalid_argument("market: at least one condition is required");
    for (std::size_t i = 0; i < config.conditions.size(); ++i)
        for (std::size_t j = i + 1; j < config.conditions.size(); ++j)
            if (config.conditions[i] == config.conditions[j])
                throw std::invalid_argument("market: duplicate condition requested");
    validate_policy(config.policy);

    WorldSet set;
    set.appeals = draw_appeals(config);

    MarketParams params;
    params.appeals = set.appeals;
    params.n_agents = config.n_agents;
    params.policy = config.policy;

    const std::size_t R = config.worlds_per_condition;
    set.conditions.resize(config.conditions.size());
    for (std::size_t ci = 0; ci < config.conditions.size(); ++ci) {
        set.conditions[ci].condition = config.conditions[ci];
        set.conditions[ci].worlds.resize(R);
    }

    parallel_for_index(config.conditions.size() * R, threads, [&](std::size_t unit) {
        const std::size_t ci = unit / R;
        const std::size_t w = unit % R;
        const InfluenceCondition cond = config.conditions[ci];
        const std::uint64_t seed = rng::derive_seed(
            config.master_seed, rng::world_stream(condition_index(cond), w));
        set.conditions[ci].worlds[w] = run_realization(params, cond, seed);
    });
    return set;
}

} // namespace herdlab
