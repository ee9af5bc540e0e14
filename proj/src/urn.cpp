#include "herdlab/urn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "herdlab/parallel.hpp"
#include "herdlab/rng.hpp"

namespace herdlab {

namespace {

void validate_rule(const UrnRule& rule) {
    if (!(rule.gamma >= 0.0) || !std::isfinite(rule.gamma))
        throw std::invalid_argument("urn rule: gamma must be finite and >= 0");
    if (rule.increment < 1)
        throw std::invalid_argument("urn rule: increment must be >= 1");
}

void validate_state(const UrnState& state) {
    if (state.counts.empty())
        throw std::invalid_argument("urn state: counts must be non-empty");
    for (auto c : state.counts)
        if (c == 0)
            throw std::invalid_argument("urn state: all counts must be positive");
}

// Cumulative inversion, gamma == 1: integer cumulative sums, the only
// floating-point operation is the single product u * total.
std::size_t pick_linear(const std::vector<std::uint64_t>& counts, double u) {
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    const double scaled = u * static_cast<double>(total);
    std::uint64_t cum = 0;
    for (std::size_t i = 0; i + 1 < counts.size(); ++i) {
        cum += counts[i];
        if (scaled <= static_cast<double>(cum)) return i;
    }
    return counts.size() - 1;
}

std::size_t pick_weighted(const std::vector<std::uint64_t>& counts, double gamma, double u) {
    if (gamma == 0.0) {
        const double scaled = u * static_cast<double>(counts.size());
        double cum = 0.0;
        for (std::size_t i = 0; i + 1 < counts.size(); ++i) {
            cum += 1.0;
            if (scaled <= cum) return i;
        }
        return counts.size() - 1;
    }
    double total = 0.0;
    for (auto c : counts) total += std::pow(static_cast<double>(c), gamma);
    const double scaled = u * total;
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < counts.size(); ++i) {
        cum += std::pow(static_cast<double>(counts[i]), gamma);
        if (scaled <= cum) return i;
    }
    return counts.size() - 1;
}

} // namespace

double share0(const UrnState& state) {
    validate_state(state);
    std::uint64_t total = 0;
    for (auto c : state.counts) total += c;
    return static_cast<double>(state.counts[0]) / static_cast<double>(total);
}

std::size_t urn_step(UrnState& state, const UrnRule& rule, double u) {
    validate_state(state);
    validate_rule(rule);
    if (!(u >= 0.0 && u < 1.0))
        throw std::invalid_argument("urn_step: u must lie in [0, 1)");
    const std::size_t chosen = rule.gamma == 1.0 ? pick_linear(state.counts, u)
                                                 : pick_weighted(state.counts, rule.gamma, u);
    state.counts[chosen] += rule.increment;
    state.step += 1;
    return chosen;
}

ShareTrajectory run_urn(const UrnState& initial, const UrnRule& rule,
                        std::uint64_t steps, std::uint64_t seed) {
    validate_state(initial);
    validate_rule(rule);
    if (steps < 1) throw std::invalid_argument("run_urn: steps must be >= 1");

    UrnState state = initial;
    rng::Xoshiro256pp gen(seed);
    ShareTrajectory traj;
    traj.initial_share = share0(state);
    traj.points.reserve(steps);

    // Hot loop bypasses the per-call validation in urn_step; counts never
    // decrease so the state stays valid throughout.
    std::uint64_t total = 0;
    for (auto c : state.counts) total += c;
    const bool linear = rule.gamma == 1.0;
    for (std::uint64_t k = 1; k <= steps; ++k) {
        const double u = gen.next_double();
        const std::size_t chosen = linear ? pick_linear(state.counts, u)
                                          : pick_weighted(state.counts, rule.gamma, u);
        state.counts[chosen] += rule.increment;
        total += rule.increment;
        state.step += 1;
        traj.points.push_back({k, static_cast<double>(state.counts[0]) / static_cast<double>(total)});
    }
    return traj;
}

std::vector<double> final_share_ensemble(const UrnState& initial, const UrnRule& rule,
                                         std::uint64_t steps, std::size_t n_runs,
                                         std::uint64_t master_seed, int threads) {
    validate_state(initial);
    validate_rule(rule);
    if (steps < 1) throw std::invalid_argument("final_share_ensemble: steps must be >= 1");
    if (n_runs < 1) throw std::invalid_argument("final_share_ensemble: n_runs must be >= 1");

    std::vector<double> finals(n_runs);
    parallel_for_index(n_runs, threads, [&](std::size_t r) {
        UrnState state = initial;
        rng::Xoshiro256pp gen(rng::derive_seed(master_seed, r));
        std::uint64_t total = 0;
        for (auto c : state.counts) total += c;
        const bool linear = rule.gamma == 1.0;
        for (std::uint64_t k = 0; k < steps; ++k) {
            const double u = gen.next_double();
            const std::size_t chosen = linear ? pick_linear(state.counts, u)
                                              : pick_weighted(state.counts, rule.gamma, u);
            state.counts[chosen] += rule.increment;
            total += rule.increment;
        }
        finals[r] = static_cast<double>(state.counts[0]) / static_cast<double>(total);
    });
    return finals;
}

} // namespace herdlab
