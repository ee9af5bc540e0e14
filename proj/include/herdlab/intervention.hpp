#pragma once

#include <cstdint>
#include <vector>

#include "herdlab/market.hpp"

namespace herdlab {

struct BurstFlag {
    std::uint32_t item = 0;
    std::uint64_t window_start = 0; // first event step of the window (1-based)
    std::uint64_t window_end = 0;   // last event step of the window (inclusive)
    double surprise = 0.0;          // -ln P(X >= observed downloads), nats
};

struct DetectionReport {
    std::vector<BurstFlag> flagged; // every entry has surprise >= threshold
    std::size_t window = 0;
    double threshold = 0.0;
};

struct WinShift {
    double baseline = 0.0; // P(target is final top item), organic runs
    double treated = 0.0;  // same with the puppet schedule applied
    double delta = 0.0;    // treated - baseline
};

// Final top-download item, ties to the lowest id.
std::uint32_t final_top_item(const RealizationTrace& trace);

// One world with scheduled fake users spliced in. An empty schedule
// reproduces the organic trace bit for bit.
RealizationTrace apply_puppets(const MarketParams& params, InfluenceCondition condition,
                               std::uint64_t world_seed, const PuppetSchedule& schedule);

// Paired estimate of the schedule's lift: run r's organic and puppet arms
// share the seed derived from (master_seed, r), so delta is a within-pair
// difference. Needs n_runs >= 2.
WinShift win_probability_shift(const MarketParams& params, InfluenceCondition condition,
                               const PuppetSchedule& schedule, std::size_t n_runs,
                               std::uint64_t master_seed, int threads = 1);

// Sliding-window burst scan: for each window the organic model is frozen at
// the pre-window state, an item's download count is Binomial(window,
// choice_probability * appeal) under it, and surprise is the negative log
// upper-tail probability of the observed count. Windows advance one event at
// a time; every (item, window) with surprise >= threshold is flagged.
// Requires 5 <= window <= trace length.
//
// Default operating point (window 15, threshold 50 nats): under feedback
// conditions the organic takeoff phase itself drifts away from the frozen
// model, so thresholds in the tens of nats are routine on clean traces;
// wider windows accumulate more drift. Feedback-free traces stay below 20
// nats, and a front-loaded fake-user burst clears 50 comfortably.
DetectionReport detect_bursts(const MarketParams& params, const RealizationTrace& trace,
                              std::size_t window = 15, double threshold = 50.0);

} // namespace herdlab
