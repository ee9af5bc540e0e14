#include "herdlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace herdlab {

namespace {

constexpr double kShareSumTolerance = 1e-9;

void validate_share_vector(const std::vector<double>& shares, const char* who) {
    if (shares.empty())
        throw std::invalid_argument(std::string(who) + ": empty share vector");
    double sum = 0.0;
    for (double s : shares) {
        if (!std::isfinite(s) || s < 0.0)
            throw std::invalid_argument(std::string(who) + ": shares must be non-negative");
        sum += s;
    }
    if (std::abs(sum - 1.0) > kShareSumTolerance)
        throw std::invalid_argument(std::string(who) + ": shares must sum to 1");
}

// Tied values get the mean of their 1-based sorted positions.
std::vector<double> average_ranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
        i = j + 1;
    }
    return ranks;
}

std::size_t prefix_length(double f, std::size_t n_events) {
    if (!std::isfinite(f) || f <= 0.0 || f > 1.0)
        throw std::invalid_argument("prediction fraction must lie in (0, 1]");
    const auto raw = static_cast<std::size_t>(std::ceil(f * static_cast<double>(n_events)));
    const std::size_t len = std::min(raw, n_events);
    if (len < 1)
        throw std::invalid_argument("prediction fraction selects an empty prefix");
    return len;
}

// Most downloads within events [0, len); ties go to the lowest item id.
std::uint32_t download_leader(const std::vector<TraceEvent>& events, std::size_t len,
                              std::size_t n_items) {
    std::vector<std::uint64_t> counts(n_items, 0);
    for (std::size_t e = 0; e < len; ++e)
        if (events[e].downloaded) ++counts[events[e].item_id];
    std::size_t best = 0;
    for (std::size_t i = 1; i < n_items; ++i)
        if (counts[i] > counts[best]) best = i;
    return static_cast<std::uint32_t>(best);
}

const std::vector<RealizationTrace>& worlds_for(const WorldSet& set,
                                                InfluenceCondition condition) {
    for (const auto& cw : set.conditions)
        if (cw.condition == condition) return cw.worlds;
    throw std::invalid_argument("condition not present in world set");
}

double entropy_nats(const std::vector<std::uint64_t>& counts, std::uint64_t total) {
    double h = 0.0;
    for (std::uint64_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log(p);
    }
    return h;
}

} // namespace

double gini(const std::vector<double>& shares) {
    validate_share_vector(shares, "gini");
    const std::size_t n = shares.size();
    double pairwise = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) pairwise += std::abs(shares[i] - shares[j]);
    return pairwise / (2.0 * static_cast<double>(n));
}

double unpredictability(const std::vector<std::vector<double>>& worlds) {
    const std::size_t R = worlds.size();
    if (R < 2)
        throw std::invalid_argument("unpredictability: need at least 2 worlds");
    const std::size_t S = worlds[0].size();
    for (const auto& w : worlds) {
        if (w.size() != S)
            throw std::invalid_argument("unpredictability: worlds differ in item count");
        validate_share_vector(w, "unpredictability");
    }
    const double pair_norm = 2.0 / (static_cast<double>(R) * static_cast<double>(R - 1));
    double u = 0.0;
    for (std::size_t i = 0; i < S; ++i) {
        double item_sum = 0.0;
        for (std::size_t j = 0; j < R; ++j)
            for (std::size_t k = j + 1; k < R; ++k)
                item_sum += std::abs(worlds[j][i] - worlds[k][i]);
        u += pair_norm * item_sum;
    }
    return u / static_cast<double>(S);
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("spearman: input lengths differ");
    if (x.size() < 2)
        throw std::invalid_argument("spearman: need at least 2 observations");
    const std::vector<double> rx = average_ranks(x);
    const std::vector<double> ry = average_ranks(y);
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = rx[i] - mx;
        const double dy = ry[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0)
        throw std::invalid_argument("spearman: first input has no rank variation");
    if (syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

std::pair<double, std::size_t> early_leader_prediction(
    const std::vector<RealizationTrace>& worlds, double f) {
    if (worlds.empty())
        throw std::invalid_argument("early_leader_prediction: no worlds");
    std::size_t correct = 0;
    for (const auto& world : worlds) {
        const std::size_t n_events = world.events.size();
        const std::size_t n_items = world.final_shares.size();
        if (n_events == 0 || n_items == 0)
            throw std::invalid_argument("early_leader_prediction: empty trace");
        const std::size_t len = prefix_length(f, n_events);
        const std::uint32_t predicted = download_leader(world.events, len, n_items);
        const std::uint32_t final_leader = download_leader(world.events, n_events, n_items);
        if (predicted == final_leader) ++correct;
    }
    return {static_cast<double>(correct) / static_cast<double>(worlds.size()), worlds.size()};
}

std::pair<double, std::size_t> early_leader_prediction(const WorldSet& set,
                                                       InfluenceCondition condition, double f) {
    return early_leader_prediction(worlds_for(set, condition), f);
}

double ex_ante_predictability(const std::vector<double>& appeals,
                              const std::vector<RealizationTrace>& worlds) {
    if (appeals.size() < 2)
        throw std::invalid_argument("ex_ante_predictability: need at least 2 items");
    const auto [lo, hi] = std::minmax_element(appeals.begin(), appeals.end());
    if (*lo == *hi)
        throw std::invalid_argument(
            "ex_ante_predictability: constant appeals leave the rank correlation undefined");
    if (worlds.empty())
        throw std::invalid_argument("ex_ante_predictability: no worlds");
    double sum = 0.0;
    for (const auto& world : worlds) {
        if (world.final_shares.size() != appeals.size())
            throw std::invalid_argument("ex_ante_predictability: share/appeal length mismatch");
        sum += spearman(appeals, world.final_shares);
    }
    return sum / static_cast<double>(worlds.size());
}

double ex_ante_predictability(const WorldSet& set, InfluenceCondition condition) {
    return ex_ante_predictability(set.appeals, worlds_for(set, condition));
}

std::vector<int> quantile_bins(const std::vector<double>& values, int n_bins) {
    if (n_bins < 2)
        throw std::invalid_argument("quantile_bins: need at least 2 bins");
    if (values.empty())
        throw std::invalid_argument("quantile_bins: empty input");
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    std::vector<double> edges;
    edges.reserve(static_cast<std::size_t>(n_bins) - 1);
    for (int k = 1; k < n_bins; ++k)
        edges.push_back(sorted[(static_cast<std::size_t>(k) * n) / static_cast<std::size_t>(n_bins)]);
    std::vector<int> bins(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        int b = 0;
        for (double e : edges)
            if (values[i] >= e) ++b;
        bins[i] = b;
    }
    return bins;
}

double rigidity_index(const std::vector<RealizationTrace>& traces, int n_bins) {
    if (n_bins < 2)
        throw std::invalid_argument("rigidity_index: need at least 2 bins");
    std::vector<double> signals;
    std::vector<double> ranks;
    for (const auto& trace : traces) {
        const std::size_t n_items = trace.final_shares.size();
        if (n_items == 0)
            throw std::invalid_argument("rigidity_index: trace without items");
        LeaderBoard board(n_items);
        for (const auto& event : trace.events) {
            signals.push_back(event.signal_shown);
            ranks.push_back(static_cast<double>(board.rank_of(event.item_id)));
            if (event.downloaded) board.record_download(event.item_id);
        }
    }
    const std::size_t n = signals.size();
    if (n < 100)
        throw std::invalid_argument("rigidity_index: need at least 100 pooled events");

    const std::vector<int> sig_bin = quantile_bins(signals, n_bins);
    const std::vector<int> rank_bin = quantile_bins(ranks, n_bins);

    const std::size_t B = static_cast<std::size_t>(n_bins);
    std::vector<std::uint64_t> joint(B * B, 0), sig_marginal(B, 0), rank_marginal(B, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto s = static_cast<std::size_t>(sig_bin[i]);
        const auto r = static_cast<std::size_t>(rank_bin[i]);
        ++joint[s * B + r];
        ++sig_marginal[s];
        ++rank_marginal[r];
    }
    const double h_choice = entropy_nats(rank_marginal, n);
    if (h_choice == 0.0) return 1.0;
    const double h_conditional = entropy_nats(joint, n) - entropy_nats(sig_marginal, n);
    return std::clamp(1.0 - h_conditional / h_choice, 0.0, 1.0);
}

double ks_uniform_statistic(const std::vector<double>& samples) {
    if (samples.empty())
        throw std::invalid_argument("ks_uniform_statistic: empty sample");
    for (double s : samples)
        if (!std::isfinite(s) || s < 0.0 || s > 1.0)
            throw std::invalid_argument("ks_uniform_statistic: samples must lie in [0, 1]");
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double hi = static_cast<double>(i + 1) / static_cast<double>(n) - sorted[i];
        const double lo = sorted[i] - static_cast<double>(i) / static_cast<double>(n);
        d = std::max(d, std::max(hi, lo));
    }
    return d;
}

double martingale_residual(const std::vector<ShareTrajectory>& trajectories) {
    if (trajectories.size() < 2)
        throw std::invalid_argument("martingale_residual: need at least 2 trajectories");
    const double initial = trajectories[0].initial_share;
    std::vector<double> finals;
    finals.reserve(trajectories.size());
    for (const auto& t : trajectories) {
        if (t.initial_share != initial)
            throw std::invalid_argument("martingale_residual: trajectories start from different shares");
        if (t.points.empty())
            throw std::invalid_argument("martingale_residual: trajectory without points");
        finals.push_back(t.points.back().share);
    }
    return martingale_residual(initial, finals);
}

double martingale_residual(double initial_share, const std::vector<double>& finals) {
    if (finals.size() < 2)
        throw std::invalid_argument("martingale_residual: need at least 2 final shares");
    double mean = 0.0;
    for (double f : finals) mean += f;
    mean /= static_cast<double>(finals.size());
    return std::abs(mean - initial_share);
}

ConditionMetrics compute_condition_metrics(const WorldSet& set, InfluenceCondition condition,
                                           const std::vector<double>& prediction_fractions,
                                           int rigidity_bins) {
    const auto& worlds = worlds_for(set, condition);
    if (prediction_fractions.empty())
        throw std::invalid_argument("prediction fractions must not be empty");
    double prev = 0.0;
    for (double f : prediction_fractions) {
        if (!std::isfinite(f) || f <= prev || f > 1.0)
            throw std::invalid_argument(
                "prediction fractions must be strictly increasing within (0, 1]");
        prev = f;
    }

    ConditionMetrics out;
    out.condition = condition;
    double gini_sum = 0.0;
    std::vector<std::vector<double>> share_vectors;
    share_vectors.reserve(worlds.size());
    for (const auto& world : worlds) {
        gini_sum += gini(world.final_shares);
        share_vectors.push_back(world.final_shares);
    }
    out.gini_mean = worlds.empty() ? 0.0 : gini_sum / static_cast<double>(worlds.size());
    out.unpredictability_U = unpredictability(share_vectors);
    out.ex_ante_spearman = ex_ante_predictability(set.appeals, worlds);
    out.rigidity = rigidity_index(worlds, rigidity_bins);
    for (double f : prediction_fractions) {
        const auto [accuracy, n] = early_leader_prediction(worlds, f);
        out.prediction_curve.points.push_back({f, accuracy, n});
    }
    return out;
}

} // namespace herdlab
