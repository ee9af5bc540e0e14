#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace herdlab {

// Graded social-influence conditions: Independent shows no download counts,
// Weak shows counts in a fixed random display order, Strong shows counts with
// items ranked by downloads.
enum class InfluenceCondition { Independent, Weak, Strong };

constexpr std::size_t condition_index(InfluenceCondition c) {
    return static_cast<std::size_t>(c);
}

std::string condition_name(InfluenceCondition c);
InfluenceCondition condition_from_name(const std::string& name);

struct Item {
    std::uint32_t id = 0;
    double appeal = 0.0; // latent intrinsic quality in [0, 1]
    std::uint64_t downloads = 0;
};

// alpha weighs appeal, beta weighs the shown social signal (the coupling
// dial), rank_bias adds attention weight to top display slots under Strong.
struct AgentPolicy {
    double alpha = 1.0;
    double beta = 1.0;
    double rank_bias = 1.0;
    std::uint32_t actions_per_agent = 1;
};

struct MarketState {
    std::vector<Item> items;
    std::vector<std::uint32_t> display_order; // permutation of item ids
    std::uint64_t step = 0;
};

struct TraceEvent {
    std::uint64_t step = 0; // contiguous from 1
    std::uint32_t agent_id = 0;
    std::uint32_t item_id = 0;
    double signal_shown = 0.0; // social signal of the chosen item at choice time
    int rating = 0;            // 1..5
    bool downloaded = false;
    bool is_puppet = false;
};

struct RealizationTrace {
    InfluenceCondition condition = InfluenceCondition::Independent;
    std::vector<TraceEvent> events;
    std::vector<double> final_shares; // per-item download share (all zero if no downloads)
    std::uint64_t world_seed = 0;
};

// Scheduled fake-user actions: each listed event slot (1-based, strictly
// increasing) is taken from the organic agent and spent on target_item with a
// rating of 5 and a guaranteed download.
struct PuppetSchedule {
    std::uint32_t target_item = 0;
    std::vector<std::uint64_t> steps;
};

PuppetSchedule front_loaded_schedule(std::uint32_t target_item, std::size_t k);

// Everything one world needs: shared appeals plus the cohort and policy.
struct MarketParams {
    std::vector<double> appeals;
    std::uint32_t n_agents = 1200;
    AgentPolicy policy;
};

struct ConditionWorlds {
    InfluenceCondition condition = InfluenceCondition::Independent;
    std::vector<RealizationTrace> worlds;
};

struct WorldSet {
    std::vector<double> appeals;
    std::vector<ConditionWorlds> conditions;
};

// Declarative description of a world set; appeals are drawn once from
// Uniform(appeal_low, appeal_high) on the appeal seed stream.
struct MarketConfig {
    std::size_t n_items = 50;
    std::uint32_t n_agents = 1200;
    AgentPolicy policy;
    double appeal_low = 0.2;
    double appeal_high = 0.8;
    std::vector<InfluenceCondition> conditions = {
        InfluenceCondition::Independent, InfluenceCondition::Weak, InfluenceCondition::Strong};
    std::size_t worlds_per_condition = 8;
    std::uint64_t master_seed = 0;
};

std::vector<double> draw_appeals(const MarketConfig& config);

// Display order at step 0: identity for Independent and Strong (ids tie on
// zero downloads), a world-fixed random shuffle for Weak. Deterministic in
// (n_items, condition, world_seed), so observers can reconstruct it.
std::vector<std::uint32_t> initial_display_order(std::size_t n_items,
                                                 InfluenceCondition condition,
                                                 std::uint64_t world_seed);

// Signal an agent sees for one item: Independent -> 0; Weak -> ln(1 + d);
// Strong -> ln(1 + d) + rank_bias * ln(n_items / (1 + display_rank)).
double social_signal(const Item& item, InfluenceCondition condition,
                     std::size_t display_rank, std::size_t n_items,
                     const AgentPolicy& policy);

// Multinomial logit over items: P(i) proportional to
// exp(alpha * appeal_i + beta * signal_i), computed with max-subtraction.
std::vector<double> choice_probabilities(const MarketState& state, InfluenceCondition condition,
                                         const AgentPolicy& policy);

// Rating 1..5 via inverse CDF of Binomial(4, appeal) on u; E[rating] = 1 + 4*appeal.
int simulate_listen(double appeal, double u);

// Download iff u < (rating - 1) / 4.
bool download_decision(int rating, double u);

// One world. Event e >= 1 draws (choice, listen, download) from the stream
// seeded derive_seed(world_seed, e); puppet events consume no randomness, so
// organic events keep identical draws across puppet schedules.
RealizationTrace run_realization(const MarketParams& params, InfluenceCondition condition,
                                 std::uint64_t world_seed,
                                 const PuppetSchedule* puppets = nullptr);

WorldSet run_world_set(const MarketConfig& config, int threads = 1);

// Download-count ranking maintained incrementally: downloads descending,
// ties broken by ascending id. Used for Strong display orders, popularity
// ranks, and prefix leaders.
class LeaderBoard {
public:
    explicit LeaderBoard(std::size_t n_items);

    void record_download(std::uint32_t item);
    std::uint32_t leader() const { return order_[0]; }
    std::size_t rank_of(std::uint32_t item) const { return position_[item]; }
    const std::vector<std::uint32_t>& order() const { return order_; }
    std::uint64_t downloads(std::uint32_t item) const { return downloads_[item]; }

private:
    std::vector<std::uint32_t> order_;    // item ids, best first
    std::vector<std::size_t> position_;   // item id -> index in order_
    std::vector<std::uint64_t> downloads_;
};

} // namespace herdlab
