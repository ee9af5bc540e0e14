#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "herdlab/market.hpp"
#include "herdlab/urn.hpp"

namespace herdlab {

// Gini concentration of a share vector: sum_ij |m_i - m_j| / (2n).
// Shares must be non-negative and sum to 1 within 1e-9.
double gini(const std::vector<double>& shares);

// Cross-world outcome dispersion: mean over items of the mean absolute
// share difference across world pairs. 0 iff all worlds agree exactly.
// Needs >= 2 worlds, all share vectors of equal length summing to 1.
double unpredictability(const std::vector<std::vector<double>>& worlds);

// Spearman rank correlation with average-rank ties. Errors if x has no rank
// variance; returns 0 when only y is degenerate (no ordering information).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

struct PredictionPoint {
    double f = 0.0;        // prefix fraction in (0, 1]
    double accuracy = 0.0; // n_correct / n_worlds
    std::size_t n_worlds = 0;
};

struct PredictionCurve {
    std::vector<PredictionPoint> points; // f strictly increasing
};

// Prefix-leader predictor: after the first ceil(f * n_events) events of each
// world, name the item with the most downloads so far (tie: lowest id) and
// score it against the final top-download item (same tie-break).
std::pair<double, std::size_t> early_leader_prediction(
    const std::vector<RealizationTrace>& worlds, double f);
std::pair<double, std::size_t> early_leader_prediction(const WorldSet& set,
                                                       InfluenceCondition condition, double f);

// Mean over worlds of Spearman(appeal, final share). Requires >= 2 items with
// distinct appeals; a world whose shares are all equal contributes 0.
double ex_ante_predictability(const std::vector<double>& appeals,
                              const std::vector<RealizationTrace>& worlds);
double ex_ante_predictability(const WorldSet& set, InfluenceCondition condition);

// Mutual-information share between the shown signal and the popularity rank
// of the chosen item: 1 - H(choice_rank_bin | signal_bin) / H(choice_rank_bin),
// plug-in entropies over n_bins quantile bins, clamped to [0,1]. Ranks are
// reconstructed by replaying downloads; rigidity is 1 by convention when the
// choice-rank entropy is 0. Requires n_bins >= 2 and >= 100 pooled events.
double rigidity_index(const std::vector<RealizationTrace>& traces, int n_bins = 8);

// Quantile bin index per value, edges at the k*N/n_bins order statistics.
// Constant inputs collapse into a single bin.
std::vector<int> quantile_bins(const std::vector<double>& values, int n_bins);

// Kolmogorov-Smirnov distance to Uniform(0,1): both one-sided gaps evaluated
// at the sorted sample points. Samples must lie in [0,1].
double ks_uniform_statistic(const std::vector<double>& samples);

// |mean(final shares) - initial share| over >= 2 trajectories that start from
// the same initial share, plus an overload taking the finals directly.
double martingale_residual(const std::vector<ShareTrajectory>& trajectories);
double martingale_residual(double initial_share, const std::vector<double>& finals);

struct ConditionMetrics {
    InfluenceCondition condition = InfluenceCondition::Independent;
    double gini_mean = 0.0;
    double unpredictability_U = 0.0;
    double ex_ante_spearman = 0.0;
    double rigidity = 0.0;
    PredictionCurve prediction_curve;
};

struct MetricsReport {
    std::vector<ConditionMetrics> conditions;
    std::optional<double> ks_uniform;         // urn runs only
    std::optional<double> martingale_residual; // urn runs only
};

// Full per-condition block from one world set: mean Gini over worlds, U,
// ex-ante Spearman, rigidity, and the prediction curve over the given
// strictly increasing fractions.
ConditionMetrics compute_condition_metrics(const WorldSet& set, InfluenceCondition condition,
                                           const std::vector<double>& prediction_fractions,
                                           int rigidity_bins = 8);

} // namespace herdlab
