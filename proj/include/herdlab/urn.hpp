#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace herdlab {

// Reinforcement urn microstate: one count per color, plus draws done so far.
struct UrnState {
    std::vector<std::uint64_t> counts;
    std::uint64_t step = 0;
};

// gamma = 1 is the linear (classical) rule; gamma = 0 degenerates to a
// uniform pick; gamma > 1 gives superlinear reinforcement and monopoly.
struct UrnRule {
    double gamma = 1.0;
    std::uint64_t increment = 1;
};

struct SharePoint {
    std::uint64_t step;
    double share;
};

// Share of color 0 after each step; the initial share is kept so ensemble
// diagnostics can check conservation against the starting state.
struct ShareTrajectory {
    double initial_share = 0.0;
    std::vector<SharePoint> points;
};

double share0(const UrnState& state);

// One draw: color i wins with probability counts[i]^gamma / sum_j counts[j]^gamma,
// by cumulative inversion of u in index order (lower index wins an exact
// boundary hit). The chosen color gains `increment` and step advances.
// u must lie in [0, 1); counts must be non-empty and all positive.
std::size_t urn_step(UrnState& state, const UrnRule& rule, double u);

ShareTrajectory run_urn(const UrnState& initial, const UrnRule& rule,
                        std::uint64_t steps, std::uint64_t seed);

// Final share of color 0 for n_runs independent runs; run r draws from the
// stream seeded derive_seed(master_seed, r). Output order is by run index,
// whatever the thread count.
std::vector<double> final_share_ensemble(const UrnState& initial, const UrnRule& rule,
                                         std::uint64_t steps, std::size_t n_runs,
                                         std::uint64_t master_seed, int threads = 1);

} // namespace herdlab
