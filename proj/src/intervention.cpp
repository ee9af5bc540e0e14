#include "herdlab/intervention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "herdlab/parallel.hpp"
#include "herdlab/rng.hpp"

namespace herdlab {

namespace {

double log_binomial_pmf(std::uint64_t k, std::uint64_t n, double q) {
    if (q <= 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    if (q >= 1.0) return k == n ? 0.0 : -std::numeric_limits<double>::infinity();
    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(k);
    const double lchoose =
        std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0);
    return lchoose + kd * std::log(q) + (nd - kd) * std::log1p(-q);
}

// ln P(X >= x) for X ~ Binomial(n, q), summed in log space.
double log_binomial_tail(std::uint64_t x, std::uint64_t n, double q) {
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms;
    terms.reserve(n - x + 1);
    for (std::uint64_t j = x; j <= n; ++j) {
        terms.push_back(log_binomial_pmf(j, n, q));
        max_term = std::max(max_term, terms.back());
    }
    if (max_term == -std::numeric_limits<double>::infinity()) return max_term;
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - max_term);
    return max_term + std::log(sum);
}

} // namespace

std::uint32_t final_top_item(const RealizationTrace& trace) {
    if (trace.final_shares.empty())
        throw std::invalid_argument("final_top_item: trace without items");
    std::size_t best = 0;
    for (std::size_t i = 1; i < trace.final_shares.size(); ++i)
        if (trace.final_shares[i] > trace.final_shares[best]) best = i;
    return static_cast<std::uint32_t>(best);
}

RealizationTrace apply_puppets(const MarketParams& params, InfluenceCondition condition,
                               std::uint64_t world_seed, const PuppetSchedule& schedule) {
    return run_realization(params, condition, world_seed, &schedule);
}

WinShift win_probability_shift(const MarketParams& params, InfluenceCondition condition,
                               const PuppetSchedule& schedule, std::size_t n_runs,
                               std::uint64_t master_seed, int threads) {
    if (n_runs < 2)
        throw std::invalid_argument("win_probability_shift: need at least 2 runs");
    std::vector<std::uint8_t> base_win(n_runs, 0), treat_win(n_runs, 0);
    parallel_for_index(n_runs, threads, [&](std::size_t r) {
        const std::uint64_t seed = rng::derive_seed(master_seed, r);
        const RealizationTrace base = run_realization(params, condition, seed);
        const RealizationTrace treat = run_realization(params, condition, seed, &schedule);
        base_win[r] = final_top_item(base) == schedule.target_item ? 1 : 0;
        treat_win[r] = final_top_item(treat) == schedule.target_item ? 1 : 0;
    });
    std::uint64_t base_total = 0, treat_total = 0;
    for (std::size_t r = 0; r < n_runs; ++r) {
        base_total += base_win[r];
        treat_total += treat_win[r];
    }
    WinShift shift;
    shift.baseline = static_cast<double>(base_total) / static_cast<double>(n_runs);
    shift.treated = static_cast<double>(treat_total) / static_cast<double>(n_runs);
    shift.delta = shift.treated - shift.baseline;
    return shift;
}

DetectionReport detect_bursts(const MarketParams& params, const RealizationTrace& trace,
                              std::size_t window, double threshold) {
    if (window < 5)
        throw std::invalid_argument("detect_bursts: window must be >= 5");
    const std::size_t n_events = trace.events.size();
    if (window > n_events)
        throw std::invalid_argument("detect_bursts: window longer than trace");
    if (std::isnan(threshold))
        throw std::invalid_argument("detect_bursts: threshold must not be NaN");
    const std::size_t n_items = params.appeals.size();
    if (trace.final_shares.size() != n_items)
        throw std::invalid_argument("detect_bursts: trace and params disagree on item count");

    MarketState state;
    state.items.reserve(n_items);
    for (std::size_t i = 0; i < n_items; ++i)
        state.items.push_back({static_cast<std::uint32_t>(i), params.appeals[i], 0});
    state.display_order = initial_display_order(n_items, trace.condition, trace.world_seed);
    LeaderBoard board(n_items);

    std::vector<std::uint32_t> window_count(n_items, 0);
    for (std::size_t e = 0; e < window; ++e)
        if (trace.events[e].downloaded) ++window_count[trace.events[e].item_id];

    DetectionReport report;
    report.window = window;
    report.threshold = threshold;

    for (std::size_t s = 0; s + window <= n_events; ++s) {
        if (trace.condition == InfluenceCondition::Strong) state.display_order = board.order();
        const std::vector<double> probs =
            choice_probabilities(state, trace.condition, params.policy);
        for (std::size_t i = 0; i < n_items; ++i) {
            const std::uint32_t x = window_count[i];
            if (x == 0) continue;
            const double q = probs[i] * params.appeals[i];
            // The tail is at least the point mass, so -log pmf bounds the
            // surprise from above; below threshold the full sum can't flag.
            if (-log_binomial_pmf(x, window, q) < threshold) continue;
            const double surprise = std::max(0.0, -log_binomial_tail(x, window, q));
            if (surprise >= threshold)
                report.flagged.push_back({static_cast<std::uint32_t>(i),
                                          static_cast<std::uint64_t>(s + 1),
                                          static_cast<std::uint64_t>(s + window), surprise});
        }
        const TraceEvent& leaving = trace.events[s];
        if (leaving.downloaded) {
            state.items[leaving.item_id].downloads += 1;
            board.record_download(leaving.item_id);
            --window_count[leaving.item_id];
        }
        if (s + window < n_events && trace.events[s + window].downloaded)
            ++window_count[trace.events[s + window].item_id];
    }
    return report;
}

} // namespace herdlab
